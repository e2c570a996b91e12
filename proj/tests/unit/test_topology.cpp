#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <queue>
#include <random>

#include "qstate/topology.hpp"

using namespace qstate;

namespace {

std::size_t bfs_components(const SurfaceMesh& m, const VertexMask& keep) {
  std::vector<char> seen(m.vertex_count(), 0);
  std::size_t count = 0;
  for (VertexId s = 0; s < m.vertex_count(); ++s) {
    if (!keep[s] || seen[s]) continue;
    ++count;
    std::queue<VertexId> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop();
      for (VertexId w : m.neighbors(v)) {
        if (keep[w] && !seen[w]) {
          seen[w] = 1;
          q.push(w);
        }
      }
    }
  }
  return count;
}

VertexMask mask_where(const MeshPtr& m, auto pred) {
  VertexMask keep(m->vertex_count(), 0);
  for (VertexId v = 0; v < m->vertex_count(); ++v) keep[v] = pred(*m, v);
  return keep;
}

}  // namespace

TEST_CASE("union-find components match breadth-first search on random masks") {
  std::mt19937_64 rng(42);
  for (const MeshPtr& m : {build_sphere_grid(20, 40, 1.0), build_torus_grid(24, 24, 1.0), build_planar_patch(20, 20, 1)}) {
    for (double p : {0.3, 0.5, 0.6, 0.8}) {
      std::bernoulli_distribution coin(p);
      VertexMask keep(m->vertex_count());
      for (auto& k : keep) k = coin(rng);
      CHECK(count_components(*m, keep) == bfs_components(*m, keep));
      CHECK(connected_components(m, keep).size() == bfs_components(*m, keep));
    }
  }
}

TEST_CASE("removing a row of the sphere separates the caps") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const VertexMask keep = mask_where(m, [](const SurfaceMesh& s, VertexId v) { return s.row(v) != 16; });
  const auto comps = connected_components(m, keep);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].measure + comps[1].measure == doctest::Approx(1.0 - 64.0 / (32 * 64)));
  for (const Region& r : comps) CHECK(is_solid(*m, r));
}

TEST_CASE("torus rows are circles") {
  const MeshPtr m = build_torus_grid(32, 32, 1.0);
  const VertexMask one = mask_where(m, [](const SurfaceMesh& s, VertexId v) { return s.row(v) != 5; });
  CHECK(count_components(*m, one) == 1);
  const VertexMask two =
      mask_where(m, [](const SurfaceMesh& s, VertexId v) { return s.row(v) != 5 && s.row(v) != 20; });
  CHECK(count_components(*m, two) == 2);
}

TEST_CASE("cap measure follows Archimedes") {
  const MeshPtr m = build_sphere_grid(64, 128, 1.0);
  const VertexMask cap = mask_where(m, [](const SurfaceMesh& s, VertexId v) { return s.position(v)[2] > 0.5; });
  const Region r = region_from_mask(m, cap);
  CHECK(r.measure == doctest::Approx(0.25).epsilon(1.0 / 64));
  CHECK(region_measure(*m, r) == r.measure);
  CHECK(is_solid(*m, r));
}

TEST_CASE("a band around the equator is not solid") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const VertexMask band =
      mask_where(m, [](const SurfaceMesh& s, VertexId v) { return std::abs(s.position(v)[2]) < 0.5; });
  const auto comps = connected_components(m, band);
  REQUIRE(comps.size() == 1);
  CHECK_FALSE(is_solid(*m, comps[0]));
}

TEST_CASE("regions keep sorted vertices") {
  const MeshPtr m = build_sphere_grid(16, 32, 1.0);
  const Region r = make_region(m, {9, 3, 7});
  CHECK(r.vertices == std::vector<VertexId>{3, 7, 9});
  CHECK(r.measure == doctest::Approx(3.0 / (16 * 32)));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <random>

#include "qstate/contour_tree.hpp"
#include "qstate/corpus.hpp"
#include "qstate/topology.hpp"

using namespace qstate;

namespace {

std::vector<std::size_t> node_degrees(const ContourTree& t) {
  std::vector<std::size_t> deg(t.nodes().size(), 0);
  for (const TreeEdge& e : t.edges()) {
    ++deg[e.lower];
    ++deg[e.upper];
  }
  return deg;
}

bool strict_local_extremum(const ScalarField& f, VertexId v, bool maximum) {
  for (VertexId w : f.mesh()->neighbors(v)) {
    if (maximum ? f[w] >= f[v] : f[w] <= f[v]) return false;
  }
  return true;
}

std::size_t components_where(const ScalarField& f, auto pred) {
  VertexMask keep(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) keep[i] = pred(f[i]);
  return count_components(*f.mesh(), keep);
}

}  // namespace

TEST_CASE("height function on the sphere is a single arc") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const ContourTree t = build_contour_tree(sample_field(m, "z"));
  REQUIRE(t.nodes().size() == 2);
  REQUIRE(t.edges().size() == 1);
  CHECK(t.nodes()[t.edges()[0].lower].kind == NodeKind::minimum);
  CHECK(t.nodes()[t.edges()[0].upper].kind == NodeKind::maximum);
  CHECK(t.edges()[0].measure == doctest::Approx(1.0));
}

TEST_CASE("two-bump field has a saddle") {
  const MeshPtr m = build_sphere_grid(48, 96, 1.0);
  const ContourTree t = build_contour_tree(sample_field(m, "z^2"));
  std::size_t maxima = 0, saddles = 0;
  for (const TreeNode& n : t.nodes()) {
    maxima += n.kind == NodeKind::maximum;
    saddles += n.kind == NodeKind::saddle;
  }
  CHECK(maxima == 2);
  CHECK(saddles == 1);
}

TEST_CASE("torus band function keeps its two link saddles") {
  const MeshPtr m = build_torus_grid(32, 32, 1.0);
  const ContourTree t = build_contour_tree(sample_field(m, "sin(2*pi*v)"));
  std::size_t saddles = 0;
  for (const TreeNode& n : t.nodes()) saddles += n.kind == NodeKind::saddle;
  CHECK(saddles == 2);
}

TEST_CASE("random fields: leaves, measures and level crossings") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  std::mt19937_64 rng(99);
  for (const ScalarField& f : trig_corpus(m, 8, 3, 123)) {
    const ContourTree t = build_contour_tree(f);
    const auto deg = node_degrees(t);

    std::size_t mesh_extrema = 0;
    for (VertexId v = 0; v < m->vertex_count(); ++v) {
      mesh_extrema += strict_local_extremum(f, v, true) || strict_local_extremum(f, v, false);
    }
    std::size_t leaves = 0;
    for (std::size_t k = 0; k < t.nodes().size(); ++k) {
      if (deg[k] != 1) continue;
      ++leaves;
      const TreeNode& n = t.nodes()[k];
      CHECK(strict_local_extremum(f, n.vertex, n.kind == NodeKind::maximum));
    }
    CHECK(leaves == mesh_extrema);

    // Every vertex is counted once across edges and nodes.
    double total = 0.0;
    for (const TreeEdge& e : t.edges()) total += e.measure;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const auto sums = t.subtree_sums(m->area_weights());
    CHECK(sums[t.root()] == doctest::Approx(1.0).epsilon(1e-12));

    // On the sphere level circles separate: crossings = #{F>c} + #{F<c} - 1.
    std::uniform_real_distribution<double> level(f.min(), f.max());
    for (int s = 0; s < 50; ++s) {
      const double c = level(rng);
      std::size_t crossings = 0;
      for (const TreeEdge& e : t.edges()) {
        crossings += t.nodes()[e.lower].value < c && c < t.nodes()[e.upper].value;
      }
      const std::size_t above = components_where(f, [c](double x) { return x > c; });
      const std::size_t below = components_where(f, [c](double x) { return x < c; });
      CHECK(crossings == above + below - 1);
    }
  }
}

TEST_CASE("complement branches at a vertex sum to the rest of the mass") {
  const MeshPtr m = build_sphere_grid(24, 48, 1.0);
  const ScalarField f = trig_corpus(m, 1, 3, 8).front();
  const ContourTree t = build_contour_tree(f);
  const auto sums = t.subtree_sums(m->area_weights());
  for (VertexId v = 0; v < m->vertex_count(); v += 37) {
    const auto br = t.branches_at(v, sums);
    CHECK(std::accumulate(br.begin(), br.end(), 0.0) + m->area_weight(v) == doctest::Approx(1.0));
    const auto cb = complement_branch_measures(t, t.point_at(v));
    CHECK(std::accumulate(cb.begin(), cb.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("tree json lists nodes and edges") {
  const MeshPtr m = build_sphere_grid(16, 32, 1.0);
  const auto j = build_contour_tree(sample_field(m, "z")).to_json();
  CHECK(j["nodes"].size() == 2);
  CHECK(j["edges"].size() == 1);
  CHECK(j["nodes"][0]["kind"] == "min");
}

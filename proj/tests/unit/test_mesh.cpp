#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "qstate/corpus.hpp"
#include "qstate/kernels.hpp"
#include "qstate/mesh.hpp"

using namespace qstate;

namespace {

// V - E + F over the triangulation.
long euler_characteristic(const SurfaceMesh& m) {
  return static_cast<long>(m.vertex_count()) - static_cast<long>(m.edge_count()) +
         static_cast<long>(m.triangles().size());
}

double weight_sum(const SurfaceMesh& m) {
  return std::accumulate(m.area_weights().begin(), m.area_weights().end(), 0.0);
}

}  // namespace

TEST_CASE("sphere weights are equal and sum to the area") {
  const MeshPtr m = build_sphere_grid(32, 64, 2.5);
  CHECK(weight_sum(*m) == doctest::Approx(2.5).epsilon(1e-12));
  for (double w : m->area_weights()) CHECK(w == doctest::Approx(2.5 / (32 * 64)));
  for (VertexId v = 0; v < m->vertex_count(); ++v) {
    const auto& p = m->position(v);
    CHECK(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("torus and patch weights") {
  CHECK(weight_sum(*build_torus_grid(16, 24, 3.0)) == doctest::Approx(3.0));
  CHECK(weight_sum(*build_planar_patch(17, 17, 0.5)) == doctest::Approx(1.0));
}

TEST_CASE("triangulations have the right Euler characteristic") {
  CHECK(euler_characteristic(*build_sphere_grid(16, 32, 1.0)) == 2);
  CHECK(euler_characteristic(*build_torus_grid(16, 16, 1.0)) == 0);
  CHECK(euler_characteristic(*build_planar_patch(16, 16, 1.0)) == 1);
}

TEST_CASE("adjacency is symmetric and matches triangle edges") {
  for (const MeshPtr& m : {build_sphere_grid(12, 24, 1.0), build_torus_grid(10, 12, 1.0)}) {
    std::set<std::pair<VertexId, VertexId>> tri_edges;
    for (const Triangle& t : m->triangles()) {
      for (int k = 0; k < 3; ++k) {
        const VertexId a = t[k], b = t[(k + 1) % 3];
        tri_edges.insert({std::min(a, b), std::max(a, b)});
      }
    }
    std::size_t adj_edges = 0;
    for (VertexId a = 0; a < m->vertex_count(); ++a) {
      for (VertexId b : m->neighbors(a)) {
        const auto back = m->neighbors(b);
        CHECK(std::find(back.begin(), back.end(), a) != back.end());
        if (a < b) {
          ++adj_edges;
          CHECK(tri_edges.count({a, b}) == 1);
        }
      }
    }
    CHECK(adj_edges == tri_edges.size());
  }
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(build_sphere_grid(4, 64, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_torus_grid(16, 16, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(nlohmann::json{{"topology", "klein"}}), std::invalid_argument);
}

TEST_CASE("expression grammar") {
  const VarValues vars{0.5, -2.0, 3.0, 0.25, 0.75};
  CHECK(Expression::parse("-x^2").evaluate(vars) == doctest::Approx(-0.25));
  CHECK(Expression::parse("2*pi*u").evaluate(vars) == doctest::Approx(M_PI / 2));
  CHECK(Expression::parse("sin(x)+cos(y)*exp(z)").evaluate(vars) ==
        doctest::Approx(std::sin(0.5) + std::cos(-2.0) * std::exp(3.0)));
  CHECK(Expression::parse("(u+v)/2").evaluate(vars) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Expression::parse("x+"), std::invalid_argument);
  CHECK_THROWS_AS(Expression::parse("w"), std::invalid_argument);
  CHECK_THROWS_AS(Expression::parse("sin x"), std::invalid_argument);
}

TEST_CASE("batch evaluation is bit-identical to scalar evaluation") {
  const MeshPtr m = build_sphere_grid(16, 32, 1.0);
  std::mt19937_64 rng(3);
  const Expression e = Expression::parse(random_trig_expression(Topology::sphere, 3, rng) + "+x^3-2^y");
  std::vector<VarValues> vars;
  for (VertexId v = 0; v < m->vertex_count(); ++v) vars.push_back(kernels::vertex_vars(*m, v));
  std::vector<double> out(vars.size());
  e.evaluate_batch(vars, out);
  for (std::size_t i = 0; i < vars.size(); ++i) CHECK(out[i] == e.evaluate(vars[i]));
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const MeshPtr m = build_sphere_grid(48, 96, 1.0);
  const Expression ef = Expression::parse("x^2+sin(3*y)*z");
  const Expression eg = Expression::parse("y^2-cos(2*x)");
  const auto fs = kernels::serial::sample(*m, ef);
  const auto fp = kernels::parallel::sample(*m, ef);
  const auto gs = kernels::serial::sample(*m, eg);
  CHECK(fs == fp);
  const auto gfs = kernels::serial::chart_gradient(*m, fs);
  const auto gfp = kernels::parallel::chart_gradient(*m, fs);
  const auto ggs = kernels::serial::chart_gradient(*m, gs);
  CHECK(gfs.du == gfp.du);
  CHECK(gfs.dv == gfp.dv);
  const std::vector<double> density(m->vertex_count(), 0.7);
  CHECK(kernels::serial::bracket(gfs, ggs, density) == kernels::parallel::bracket(gfs, ggs, density));

  std::vector<kernels::Point2> pts(fs.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {fs[i], gs[i]};
  const kernels::RasterGrid grid{-1.2, -1.2, 2.6 / 64, 2.6 / 64, 64, 64};
  CHECK(kernels::serial::count_hull_centers(pts, m->cells(), grid) ==
        kernels::parallel::count_hull_centers(pts, m->cells(), grid));
  const auto edges = kernels::edge_list(*m);
  CHECK(kernels::serial::trace_edges(pts, edges, grid) == kernels::parallel::trace_edges(pts, edges, grid));
}

TEST_CASE("field arithmetic and mesh checks") {
  const MeshPtr a = build_sphere_grid(16, 32, 1.0);
  const MeshPtr b = build_sphere_grid(16, 32, 1.0);
  const MeshPtr c = build_sphere_grid(16, 16, 1.0);
  const ScalarField f = sample_field(a, "z");
  CHECK_NOTHROW(f + sample_field(b, "x"));
  CHECK_THROWS_AS(f + sample_field(c, "x"), std::invalid_argument);
  CHECK(c0_distance(f * 2.0, f + f) == 0.0);
  CHECK((f + 1.0).min() == doctest::Approx(f.min() + 1.0));
  CHECK(constant_field(a, -3.0).sup_norm() == 3.0);
}

TEST_CASE("corpus fields re-sample bit for bit from their generator") {
  const MeshPtr m = build_sphere_grid(24, 48, 1.0);
  for (const ScalarField& f : trig_corpus(m, 4, 3, 17)) {
    CHECK(f.sup_norm() == doctest::Approx(1.0).epsilon(1e-15));
    const ScalarField again = sample_field(m, f.generator());
    CHECK(c0_distance(f, again) == 0.0);
  }
  const MeshPtr t = build_torus_grid(16, 16, 1.0);
  const auto c1 = trig_corpus(t, 3, 2, 5);
  const auto c2 = trig_corpus(t, 3, 2, 5);
  for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1[i].generator() == c2[i].generator());
}

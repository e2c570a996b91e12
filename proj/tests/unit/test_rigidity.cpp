#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qstate/rigidity.hpp"

using namespace qstate;

namespace {

constexpr double kPi = std::numbers::pi;

MeshPtr torus() {
  static const MeshPtr m = build_torus_grid(64, 64, 1.0);
  return m;
}

PerturbationProblem standard(double eps, int budget, std::uint64_t seed = 1) {
  return {sample_field(torus(), "sin(2*pi*u)"), sample_field(torus(), "sin(2*pi*v)"), eps, 3, budget, seed};
}

}  // namespace

TEST_CASE("trig basis size and half-plane") {
  CHECK(trig_basis(3).size() == 48);
  CHECK(trig_basis(1).size() == 8);
  const std::vector<double> coef(48, 0.0);
  CHECK(perturbation_field(torus(), 3, coef).sup_norm() == 0.0);
}

TEST_CASE("zero budget returns the unperturbed norm exactly") {
  const PerturbationProblem p = standard(0.05, 0);
  const UpsilonEstimate e = upsilon_search(p);
  CHECK(e.best_norm == bracket_sup_norm(poisson_bracket(area_form(torus()), p.f, p.g)));
  CHECK(e.best_norm == e.base_norm);
}

TEST_CASE("commuting pair stays at zero") {
  PerturbationProblem p{sample_field(torus(), "sin(2*pi*u)"), constant_field(torus(), 0.5), 0.02, 3, 300, 4};
  CHECK(upsilon_search(p).best_norm == 0.0);
}

TEST_CASE("search is deterministic and monotone in budget") {
  const UpsilonEstimate a = upsilon_search(standard(0.05, 300, 9));
  const UpsilonEstimate b = upsilon_search(standard(0.05, 300, 9));
  CHECK(a.best_norm == b.best_norm);
  CHECK(a.f_coefficients == b.f_coefficients);
  double prev = a.base_norm;
  for (int budget : {0, 100, 400, 1200}) {
    const UpsilonEstimate e = upsilon_search(standard(0.05, budget, 9));
    CHECK(e.best_norm <= prev);
    prev = e.best_norm;
  }
}

TEST_CASE("perturbations respect the budget and reproduce the reported norm") {
  const PerturbationProblem p = standard(0.05, 600, 2);
  const UpsilonEstimate e = upsilon_search(p);
  const ScalarField df = perturbation_field(torus(), 3, e.f_coefficients);
  const ScalarField dg = perturbation_field(torus(), 3, e.g_coefficients);
  CHECK(c0_distance(p.f + df, p.f) < 0.05);
  CHECK(c0_distance(p.g + dg, p.g) < 0.05);
  CHECK(df.sup_norm() == e.f_perturbation_sup);
  CHECK(bracket_sup_norm(poisson_bracket(area_form(torus()), p.f + df, p.g + dg)) == doctest::Approx(e.best_norm));
}

TEST_CASE("curve is non-increasing in epsilon") {
  const std::vector<double> eps = {0.1, 0.02, 0.05};
  const auto curve = upsilon_curve(standard(0.0, 400, 3), eps);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].epsilon == 0.1);
  CHECK(curve[0].best_norm <= curve[2].best_norm);
  CHECK(curve[2].best_norm <= curve[1].best_norm);
}

TEST_CASE("a third-harmonic perturbation lowers the bracket below the floor") {
  // F - e sin(6 pi u), G - e sin(6 pi v): sup of the bracket is 4 pi^2 (1 - 3e)^2.
  const double e = 0.02 * 0.999;
  const auto basis = trig_basis(3);
  std::vector<double> cf(basis.size(), 0.0), cg(basis.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].sine && basis[i].k1 == 3 && basis[i].k2 == 0) cf[i] = -e;
    if (basis[i].sine && basis[i].k1 == 0 && basis[i].k2 == 3) cg[i] = -e;
  }
  const MeshPtr m = build_torus_grid(256, 256, 1.0);
  const ScalarField df = perturbation_field(m, 3, cf);
  const ScalarField dg = perturbation_field(m, 3, cg);
  CHECK(df.sup_norm() < 0.02);
  CHECK(dg.sup_norm() < 0.02);
  const double norm = bracket_sup_norm(poisson_bracket(area_form(m), sample_field(m, "sin(2*pi*u)") + df,
                                                       sample_field(m, "sin(2*pi*v)") + dg));
  CHECK(norm == doctest::Approx(4 * kPi * kPi * (1 - 3 * e) * (1 - 3 * e)).epsilon(2e-3));
  CHECK(norm < 0.9 * 4 * kPi * kPi);
}

TEST_CASE("search rejects invalid problems") {
  CHECK_THROWS_AS(upsilon_search(standard(0.0, 10)), std::invalid_argument);
  CHECK_THROWS_AS(upsilon_search(standard(5.0, 10)), std::invalid_argument);
  const MeshPtr s = build_sphere_grid(16, 32, 1.0);
  PerturbationProblem p{sample_field(s, "x"), sample_field(s, "y"), 0.05, 3, 10, 1};
  CHECK_THROWS_AS(upsilon_search(p), std::invalid_argument);
}

TEST_CASE("radial contraction covers exactly the smaller ball") {
  const RadialReport r = radial_contraction_coverage(1.0, 0.2, 128);
  CHECK(r.inner_covered);
  CHECK(r.outer_empty);
}

TEST_CASE("perturbed identities") {
  LemmaOptions opt;
  opt.trials = 12;
  opt.seed = 4;
  const LemmaReport rep = perturbed_identity_coverage(opt);
  CHECK(rep.pass_fraction == 1.0);
  for (const LemmaTrial& t : rep.trials) CHECK(t.displacement_sup == doctest::Approx(0.999 * 0.2));
  const LemmaTrial again = perturbed_identity_trial(opt, 3);
  CHECK(again.cells_checked == rep.trials[3].cells_checked);
  opt.delta = 0.0;
  CHECK_THROWS_AS(perturbed_identity_trial(opt, 0), std::invalid_argument);
  opt.delta = 1.0;
  CHECK_THROWS_AS(perturbed_identity_trial(opt, 0), std::invalid_argument);
}

TEST_CASE("local stability probe") {
  const MeshPtr m = build_planar_patch(65, 65, 1.0);
  const AreaForm form = area_form(m);
  const ScalarField f0 = sample_field(m, "v");
  const ScalarField g0 = sample_field(m, "u");
  const VertexId w = stability_witness(poisson_bracket(form, f0, g0));
  CHECK(m->params(w)[0] == doctest::Approx(0.0).scale(1.0));
  const auto region = probe_region(*m, w, 0.5);
  CHECK(probe_max_bracket(form, f0, g0, region) == doctest::Approx(1.0));

  StabilityOptions opt;
  opt.trials = 10;
  const StabilityReport r = local_stability_probe(form, f0, g0, opt);
  CHECK(r.pass_fraction == 1.0);
  for (const StabilityTrial& t : r.trials) {
    CHECK(t.f_distance < opt.delta);
    CHECK(t.g_distance < opt.delta);
  }
  CHECK_THROWS_AS(stability_witness(poisson_bracket(form, f0, f0)), std::invalid_argument);

  opt.delta = 0.0;
  for (const StabilityTrial& t : local_stability_probe(form, f0, g0, opt).trials) CHECK(t.max_bracket >= 1.0 - 1e-12);
}

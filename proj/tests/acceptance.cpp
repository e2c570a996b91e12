// One line per acceptance criterion. With an argument N only criterion N
// runs. Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qstate/contour_tree.hpp"
#include "qstate/momentmap.hpp"
#include "qstate/quasi.hpp"
#include "qstate/rigidity.hpp"
#include "qstate/symplectic.hpp"
#include "qstate/topology.hpp"
#include "qstate/verify.hpp"

using namespace qstate;

namespace {

constexpr double kPi = std::numbers::pi;
const double kFourPiSq = 4.0 * kPi * kPi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig sphere_config(int n_z, int n_phi) {
  RunConfig cfg;
  cfg.surface = {Topology::sphere, n_z, n_phi, 1.0};
  return cfg;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const MeshPtr mesh = build_sphere_grid(256, 512, 1.0);
  const QuasiState qs(SimpleQuasiMeasure::area_median(mesh));
  const ScalarField f = sample_field(mesh, "x^2");
  const ScalarField g = sample_field(mesh, "y^2");
  const double zf = zeta(qs, f);
  const double zg = zeta(qs, g);
  const double zfg = zeta(qs, f + g);
  const double pi = std::abs(zfg - zf - zg);
  const double t = seconds_since(t0);
  const bool ok = std::abs(zf) <= 0.02 && std::abs(zg) <= 0.02 && std::abs(zfg - 1.0) <= 0.02 &&
                  std::abs(pi - 1.0) <= 0.06 && t <= 10.0;
  return {ok, fmt("zeta(x^2)=%.5f zeta(y^2)=%.5f zeta(x^2+y^2)=%.5f Pi=%.5f in %.2fs", zf, zg, zfg, pi, t)};
}

Outcome criterion2() {
  RunConfig cfg = sphere_config(128, 256);
  cfg.f_expr = "x^2";
  cfg.g_expr = "y^2";
  cfg.triangle.resolution = 256;
  cfg.triangle.margin = 0.02;
  cfg.triangle.margin_cells = 3.0;
  cfg.corpus.count = 25;
  cfg.seed = 2024;
  const VerificationReport rep = run_verification_suite(cfg, Suite::triangle);
  const CaseRecord& remark = rep.cases.front();
  const double frac = remark.data.value("coverage", nlohmann::ordered_json::object()).value("fraction", 0.0);
  const bool fixed_ok = remark.passed && frac == 1.0;
  std::size_t corpus_pass = 0;
  for (std::size_t k = 1; k < rep.cases.size(); ++k) corpus_pass += rep.cases[k].passed;
  const bool ok = fixed_ok && corpus_pass == 25 && rep.cases.size() == 26;
  return {ok, fmt("(x^2,y^2) margin 0.02 fraction %.4f; random pairs %zu/25 at 3-cell margin", frac, corpus_pass)};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = sphere_config(128, 256);
  cfg.corpus.count = 100;
  cfg.corpus.k_max = 3;
  cfg.seed = 7;
  const VerificationReport rep = run_verification_suite(cfg, Suite::inequality);
  const double t = seconds_since(t0);
  double worst = 1e300;
  for (const CaseRecord& c : rep.cases) {
    if (c.error.empty()) {
      worst = std::min(worst, c.data["slack"].get<double>() / c.data["area_times_bracket"].get<double>());
    }
  }
  const bool ok = rep.passed_count() == 100 && rep.cases.size() == 100 && t <= 60.0;
  return {ok, fmt("%zu/100 pairs within 5%% slack; min relative slack %.4f; %.1fs", rep.passed_count(), worst, t)};
}

Outcome criterion4() {
  RunConfig cfg = sphere_config(64, 128);
  cfg.corpus.count = 50;
  cfg.seed = 11;
  const VerificationReport rep = run_verification_suite(cfg, Suite::axioms);
  std::string failing;
  for (const CaseRecord& c : rep.cases) {
    if (c.passed) continue;
    if (!c.error.empty()) failing += " " + c.name + "(" + c.error + ")";
    for (const auto& item : c.data.value("checks", nlohmann::ordered_json::object()).items()) {
      if (!item.value()["passed"].get<bool>()) failing += " " + c.name + ":" + item.key();
    }
  }
  const bool ok = rep.passed_count() == 50 && rep.cases.size() == 50;
  return {ok, fmt("%zu/50 fields satisfy all axioms%s", rep.passed_count(), failing.substr(0, 300).c_str())};
}

// Brute force: for each vertex, split the mesh into the vertices ranked below
// and above it, count support points per component, and keep the vertices
// where no component holds more than half the points.
double odd_point_oracle(const ScalarField& f, const SimpleQuasiMeasure& qm) {
  const MeshPtr& mesh = f.mesh();
  const std::size_t n = f.size();
  std::vector<std::pair<double, VertexId>> order;
  for (VertexId v = 0; v < n; ++v) order.emplace_back(f[v], v);
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r].second] = r;
  const std::size_t half = qm.support().size() / 2;
  double lo = 1e300, hi = -1e300;
  for (VertexId v : qm.support()) {
    // Only support vertices can qualify: moving off one changes a count.
    for (int side = 0; side < 2; ++side) {
      VertexMask keep(n, 0);
      for (VertexId w = 0; w < n; ++w) keep[w] = side == 0 ? rank[w] < rank[v] : rank[w] > rank[v];
      for (const Region& comp : connected_components(mesh, keep)) {
        std::size_t pts = 0;
        for (VertexId s : qm.support()) pts += std::binary_search(comp.vertices.begin(), comp.vertices.end(), s);
        if (pts > half) goto next;
      }
    }
    lo = std::min(lo, f[v]);
    hi = std::max(hi, f[v]);
  next:;
  }
  return 0.5 * (lo + hi);
}

Outcome criterion5() {
  const MeshPtr mesh = build_sphere_grid(128, 256, 1.0);
  const std::vector<double> heights = {-0.5, 0.1, 0.7};
  const SimpleQuasiMeasure qm = SimpleQuasiMeasure::odd_points_at_heights(mesh, heights);
  const ScalarField f = sample_field(mesh, "z");
  const double z = zeta(QuasiState(qm), f);
  const double tol = grid_tolerance(f);
  const double oracle = odd_point_oracle(f, qm);
  const bool ok = std::abs(z - 0.1) <= tol && std::abs(z - oracle) <= tol;
  return {ok, fmt("zeta(z)=%.5f oracle=%.5f tolerance %.4f", z, oracle, tol)};
}

Outcome criterion6() {
  double err[3];
  double norm128 = 0.0;
  const int sizes[3] = {32, 64, 128};
  for (int k = 0; k < 3; ++k) {
    const MeshPtr mesh = build_torus_grid(sizes[k], sizes[k], 1.0);
    const ScalarField f = sample_field(mesh, "sin(2*pi*u)");
    const ScalarField g = sample_field(mesh, "sin(2*pi*v)");
    const BracketField b = poisson_bracket(area_form(mesh), f, g);
    const ScalarField exact = sample_field(mesh, "-4*pi^2*cos(2*pi*u)*cos(2*pi*v)");
    err[k] = c0_distance(b.values, exact);
    if (k == 2) norm128 = bracket_sup_norm(b);
  }
  const double p1 = std::log2(err[0] / err[1]);
  const double p2 = std::log2(err[1] / err[2]);
  const double rel = std::abs(norm128 - kFourPiSq) / kFourPiSq;
  const bool ok = p1 >= 1.8 && p2 >= 1.8 && rel <= 0.02;
  return {ok, fmt("errors %.3e %.3e %.3e, orders %.3f %.3f; sup norm at 128^2 %.4f (%.3f%% off 4pi^2)", err[0], err[1],
                  err[2], p1, p2, norm128, 100 * rel)};
}

Outcome criterion7() {
  const MeshPtr mesh = build_sphere_grid(128, 256, 1.0);
  const QuasiState qs(SimpleQuasiMeasure::area_median(mesh));
  const ScalarField f = sample_field(mesh, "x^2");
  const ScalarField g = sample_field(mesh, "y^2");
  const AreaForm form = area_form(mesh);
  const MomentMapImage img = rasterize(f, g, 256, 256);
  const MultiplicityReport r = multiplicity_check(form, img, poisson_bracket(form, f, g), pi_triangle(qs, f, g));
  const bool ok = !r.vacuous && r.fraction_multiple >= 0.95 && r.relative_gap <= 0.10;
  return {ok, fmt("multiplicity>=2 on %.4f of %zu interior cells; sum n*area %.4f vs integral %.4f (gap %.2f%%)",
                  r.fraction_multiple, r.interior_cells, r.raster_integral, r.bracket_integral, 100 * r.relative_gap)};
}

Outcome criterion8() {
  RunConfig cfg;
  cfg.lemma = {1.0, 0.2, 200, 128};
  cfg.seed = 3;
  const VerificationReport rep = run_verification_suite(cfg, Suite::lemma_surj);
  std::size_t pass = 0;
  for (const CaseRecord& c : rep.cases) {
    if (c.name.rfind("trial-", 0) == 0) pass += c.passed;
  }
  return {pass == 200, fmt("%zu/200 perturbed identities cover B(r-delta) minus 2-cell fuzz", pass)};
}

Outcome criterion9() {
  RunConfig cfg;
  cfg.upsilon.n = 64;
  cfg.upsilon.epsilons = {0.1, 0.05, 0.02};
  cfg.upsilon.k_max = 3;
  cfg.upsilon.budget = 2000;
  cfg.seed = 5;
  const VerificationReport rep = run_verification_suite(cfg, Suite::upsilon);
  bool ok = rep.cases.size() == 5;
  std::string detail;
  for (const CaseRecord& c : rep.cases) {
    if (!c.error.empty()) {
      ok = false;
      detail += " " + c.name + " error: " + c.error;
      continue;
    }
    if (c.name.rfind("epsilon-", 0) == 0) {
      const double best = c.data["best_norm"].get<double>();
      const bool floor_ok = best >= 0.9 * kFourPiSq;
      ok = ok && floor_ok;
      detail += fmt(" eps=%g best=%.3f (%.3f*4pi^2)%s;", c.data["epsilon"].get<double>(), best, best / kFourPiSq,
                    floor_ok ? "" : " BELOW FLOOR");
    } else {
      ok = ok && c.passed;
      detail += fmt(" %s=%.6g%s;", c.name.c_str(), c.data["best_norm"].get<double>(), c.passed ? "" : " FAILED");
    }
  }
  return {ok, detail};
}

Outcome criterion10() {
  RunConfig cfg;
  cfg.stability.epsilon = 0.2;
  cfg.stability.delta = 0.01;
  cfg.stability.trials = 100;
  cfg.seed = 9;
  const VerificationReport rep = run_verification_suite(cfg, Suite::local_stability);
  std::size_t pass = 0;
  double worst = 1e300;
  for (const CaseRecord& c : rep.cases) {
    if (c.name.rfind("trial-", 0) != 0) continue;
    pass += c.passed;
    worst = std::min(worst, c.data["max_bracket"].get<double>());
  }
  return {pass == 100, fmt("%zu/100 trials report max bracket > 0.8 (smallest %.4f)", pass, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"paper example zeta/Pi values", criterion1},
      {"moment-map triangle coverage", criterion2},
      {"Pi^2 <= area * ||{F,G}||", criterion3},
      {"quasi-state axioms", criterion4},
      {"odd-point quasi-state", criterion5},
      {"bracket convergence", criterion6},
      {"multiplicity / area formula", criterion7},
      {"perturbed identity covers the ball", criterion8},
      {"Upsilon empirical floor", criterion9},
      {"local stability probe", criterion10},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && only != static_cast<int>(k + 1)) continue;
    Outcome o{false, ""};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}

#include "qstate/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "qstate/corpus.hpp"
#include "qstate/rigidity.hpp"
#include "qstate/symplectic.hpp"

namespace qstate {

const char* to_string(Suite s) {
  switch (s) {
    case Suite::triangle: return "triangle";
    case Suite::inequality: return "inequality";
    case Suite::upsilon: return "upsilon";
    case Suite::axioms: return "axioms";
    case Suite::lemma_surj: return "lemma-surj";
    case Suite::local_stability: return "local-stability";
  }
  return "?";
}

Suite suite_from_string(const std::string& s) {
  for (Suite x : {Suite::triangle, Suite::inequality, Suite::upsilon, Suite::axioms, Suite::lemma_surj,
                  Suite::local_stability}) {
    if (s == to_string(x)) return x;
  }
  throw std::invalid_argument("unknown suite '" + s + "'");
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + "." + key + ": wrong type");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

void check_expression(const std::string& text, const std::string& where) {
  try {
    Expression::parse(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config: " + where + ": " + e.what());
  }
}

void validate_quasi_spec(const json& q, const std::string& where) {
  check_keys(q, {"kind", "heights", "points", "parts", "weight"}, where);
  const std::string kind = q.value("kind", std::string());
  if (kind == "area-median") return;
  if (kind == "odd-points") {
    require(q.contains("heights") != q.contains("points"), where + ": odd-points needs exactly one of heights/points");
    const json& list = q.contains("heights") ? q["heights"] : q["points"];
    require(list.is_array() && list.size() >= 3 && list.size() % 2 == 1,
            where + ": odd-points needs an odd number >= 3 of entries");
    return;
  }
  if (kind == "combination") {
    require(q.contains("parts") && q["parts"].is_array() && !q["parts"].empty(), where + ": combination needs parts");
    double sum = 0.0;
    for (std::size_t k = 0; k < q["parts"].size(); ++k) {
      const json& p = q["parts"][k];
      const std::string w = where + ".parts[" + std::to_string(k) + "]";
      require(p.is_object() && p.contains("weight") && p["weight"].is_number(), w + ": needs a numeric weight");
      require(p.value("kind", std::string()) != "combination", w + ": nested combinations are not supported");
      require(p["weight"].get<double>() >= 0.0, w + ": negative weight");
      sum += p["weight"].get<double>();
      validate_quasi_spec(p, w);
    }
    require(std::abs(sum - 1.0) <= 1e-12, where + ": weights must sum to 1");
    return;
  }
  throw std::invalid_argument("config: " + where + ": unknown quasi-state kind '" + kind + "'");
}

SimpleQuasiMeasure build_simple(const json& q, const MeshPtr& mesh) {
  if (q.value("kind", std::string()) == "area-median") return SimpleQuasiMeasure::area_median(mesh);
  if (q.contains("heights")) {
    const std::vector<double> h = q["heights"].get<std::vector<double>>();
    return SimpleQuasiMeasure::odd_points_at_heights(mesh, h);
  }
  return SimpleQuasiMeasure::odd_points(mesh, q["points"].get<std::vector<VertexId>>());
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  check_keys(j, {"surface", "quasi_state", "fields", "corpus", "triangle", "inequality", "upsilon", "axioms", "lemma",
                 "local_stability", "seed", "output"},
             "config");
  if (j.contains("surface")) {
    const json& s = j["surface"];
    check_keys(s, {"topology", "n_u", "n_v", "total_area"}, "surface");
    std::string topo = to_string(c.surface.topology);
    read(s, "topology", topo, "surface");
    c.surface.topology = topology_from_string(topo);
    read(s, "n_u", c.surface.n_u, "surface");
    read(s, "n_v", c.surface.n_v, "surface");
    read(s, "total_area", c.surface.total_area, "surface");
  }
  require(c.surface.n_u >= kMinGrid && c.surface.n_u <= kMaxGrid && c.surface.n_v >= kMinGrid &&
              c.surface.n_v <= kMaxGrid,
          "surface dimensions must lie in [8, 4096]");
  require(c.surface.total_area > 0.0 && std::isfinite(c.surface.total_area), "surface.total_area must be positive");

  if (j.contains("quasi_state")) c.quasi_state = j["quasi_state"];
  validate_quasi_spec(c.quasi_state, "quasi_state");

  if (j.contains("fields")) {
    const json& f = j["fields"];
    check_keys(f, {"F", "G"}, "fields");
    require(f.contains("F") && f.contains("G"), "fields needs both F and G");
    c.f_expr = f["F"].get<std::string>();
    c.g_expr = f["G"].get<std::string>();
    check_expression(*c.f_expr, "fields.F");
    check_expression(*c.g_expr, "fields.G");
  }
  if (j.contains("corpus")) {
    check_keys(j["corpus"], {"count", "k_max"}, "corpus");
    read(j["corpus"], "count", c.corpus.count, "corpus");
    read(j["corpus"], "k_max", c.corpus.k_max, "corpus");
  }
  require(c.corpus.k_max >= 1 && c.corpus.k_max <= 5, "corpus.k_max must lie in [1, 5]");
  if (j.contains("triangle")) {
    const json& t = j["triangle"];
    check_keys(t, {"resolution", "margin", "margin_cells"}, "triangle");
    read(t, "resolution", c.triangle.resolution, "triangle");
    if (t.contains("margin") && !t["margin"].is_null()) c.triangle.margin = t["margin"].get<double>();
    read(t, "margin_cells", c.triangle.margin_cells, "triangle");
  }
  require(c.triangle.resolution >= kMinResolution && c.triangle.resolution <= kMaxResolution,
          "triangle.resolution must lie in [16, 4096]");
  require(!c.triangle.margin || *c.triangle.margin >= 0.0, "triangle.margin must be >= 0");
  require(c.triangle.margin_cells >= 0.0, "triangle.margin_cells must be >= 0");
  if (j.contains("inequality")) {
    check_keys(j["inequality"], {"slack_fraction"}, "inequality");
    read(j["inequality"], "slack_fraction", c.inequality.slack_fraction, "inequality");
  }
  require(c.inequality.slack_fraction >= 0.0, "inequality.slack_fraction must be >= 0");
  if (j.contains("upsilon")) {
    const json& u = j["upsilon"];
    check_keys(u, {"n", "F", "G", "epsilons", "k_max", "budget", "floor"}, "upsilon");
    read(u, "n", c.upsilon.n, "upsilon");
    read(u, "F", c.upsilon.f, "upsilon");
    read(u, "G", c.upsilon.g, "upsilon");
    read(u, "epsilons", c.upsilon.epsilons, "upsilon");
    read(u, "k_max", c.upsilon.k_max, "upsilon");
    read(u, "budget", c.upsilon.budget, "upsilon");
    read(u, "floor", c.upsilon.floor, "upsilon");
  }
  require(c.upsilon.n >= kMinGrid && c.upsilon.n <= kMaxGrid, "upsilon.n must lie in [8, 4096]");
  check_expression(c.upsilon.f, "upsilon.F");
  check_expression(c.upsilon.g, "upsilon.G");
  for (double e : c.upsilon.epsilons) require(e > 0.0 && std::isfinite(e), "upsilon.epsilons must be positive");
  require(c.upsilon.k_max >= 1 && c.upsilon.k_max <= 5, "upsilon.k_max must lie in [1, 5]");
  require(c.upsilon.budget >= 0, "upsilon.budget must be >= 0");
  if (j.contains("axioms")) {
    check_keys(j["axioms"], {"tolerance_cells"}, "axioms");
    read(j["axioms"], "tolerance_cells", c.axioms.tolerance_cells, "axioms");
  }
  require(c.axioms.tolerance_cells >= 0.0, "axioms.tolerance_cells must be >= 0");
  if (j.contains("lemma")) {
    check_keys(j["lemma"], {"r", "delta", "trials", "grid"}, "lemma");
    read(j["lemma"], "r", c.lemma.r, "lemma");
    read(j["lemma"], "delta", c.lemma.delta, "lemma");
    read(j["lemma"], "trials", c.lemma.trials, "lemma");
    read(j["lemma"], "grid", c.lemma.grid, "lemma");
  }
  require(c.lemma.r > 0.0 && c.lemma.delta > 0.0 && c.lemma.delta < c.lemma.r, "lemma needs 0 < delta < r");
  require(c.lemma.trials >= 0, "lemma.trials must be >= 0");
  require(c.lemma.grid >= kMinGrid && c.lemma.grid <= kMaxGrid, "lemma.grid must lie in [8, 4096]");
  if (j.contains("local_stability")) {
    const json& s = j["local_stability"];
    check_keys(s, {"n", "half_extent", "F0", "G0", "epsilon", "delta", "trials", "probe_radius"}, "local_stability");
    read(s, "n", c.stability.n, "local_stability");
    read(s, "half_extent", c.stability.half_extent, "local_stability");
    read(s, "F0", c.stability.f0, "local_stability");
    read(s, "G0", c.stability.g0, "local_stability");
    read(s, "epsilon", c.stability.epsilon, "local_stability");
    read(s, "delta", c.stability.delta, "local_stability");
    read(s, "trials", c.stability.trials, "local_stability");
    read(s, "probe_radius", c.stability.probe_radius, "local_stability");
  }
  require(c.stability.n >= kMinGrid && c.stability.n <= kMaxGrid, "local_stability.n must lie in [8, 4096]");
  require(c.stability.half_extent > 0.0, "local_stability.half_extent must be > 0");
  check_expression(c.stability.f0, "local_stability.F0");
  check_expression(c.stability.g0, "local_stability.G0");
  require(c.stability.epsilon > 0.0 && c.stability.epsilon < 1.0, "local_stability.epsilon must lie in (0, 1)");
  require(c.stability.delta >= 0.0, "local_stability.delta must be >= 0");
  require(c.stability.trials >= 0, "local_stability.trials must be >= 0");
  require(c.stability.probe_radius > 0.0, "local_stability.probe_radius must be > 0");

  read(j, "seed", c.seed, "config");
  std::string out = c.output.string();
  read(j, "output", out, "config");
  c.output = out;
  return c;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["surface"] = {{"topology", to_string(surface.topology)},
                  {"n_u", surface.n_u},
                  {"n_v", surface.n_v},
                  {"total_area", surface.total_area}};
  j["quasi_state"] = ordered_json::parse(quasi_state.dump());
  if (f_expr && g_expr) j["fields"] = {{"F", *f_expr}, {"G", *g_expr}};
  j["corpus"] = {{"count", corpus.count}, {"k_max", corpus.k_max}};
  j["triangle"] = {{"resolution", triangle.resolution},
                   {"margin", triangle.margin ? ordered_json(*triangle.margin) : ordered_json(nullptr)},
                   {"margin_cells", triangle.margin_cells}};
  j["inequality"] = {{"slack_fraction", inequality.slack_fraction}};
  j["upsilon"] = {{"n", upsilon.n},         {"F", upsilon.f},           {"G", upsilon.g},
                  {"epsilons", upsilon.epsilons}, {"k_max", upsilon.k_max}, {"budget", upsilon.budget},
                  {"floor", upsilon.floor}};
  j["axioms"] = {{"tolerance_cells", axioms.tolerance_cells}};
  j["lemma"] = {{"r", lemma.r}, {"delta", lemma.delta}, {"trials", lemma.trials}, {"grid", lemma.grid}};
  j["local_stability"] = {{"n", stability.n},
                          {"half_extent", stability.half_extent},
                          {"F0", stability.f0},
                          {"G0", stability.g0},
                          {"epsilon", stability.epsilon},
                          {"delta", stability.delta},
                          {"trials", stability.trials},
                          {"probe_radius", stability.probe_radius}};
  j["seed"] = seed;
  j["output"] = output.string();
  return j;
}

void RunConfig::set_cases(std::size_t n) {
  corpus.count = n;
  lemma.trials = static_cast<int>(n);
  stability.trials = static_cast<int>(n);
}

MeshPtr RunConfig::build_surface() const {
  switch (surface.topology) {
    case Topology::sphere: return build_sphere_grid(surface.n_u, surface.n_v, surface.total_area);
    case Topology::torus: return build_torus_grid(surface.n_u, surface.n_v, surface.total_area);
    case Topology::patch: return build_planar_patch(surface.n_u, surface.n_v, 0.5 * std::sqrt(surface.total_area));
  }
  throw std::invalid_argument("unreachable topology");
}

QuasiState RunConfig::build_quasi_state(const MeshPtr& mesh) const {
  if (quasi_state.value("kind", std::string()) != "combination") return QuasiState(build_simple(quasi_state, mesh));
  std::vector<std::pair<QuasiState, double>> parts;
  for (const json& p : quasi_state["parts"]) parts.emplace_back(QuasiState(build_simple(p, mesh)), p["weight"].get<double>());
  return convex_combination(parts);
}

bool VerificationReport::all_passed() const {
  for (const CaseRecord& c : cases) {
    if (!c.passed) return false;
  }
  return true;
}

std::size_t VerificationReport::passed_count() const {
  std::size_t n = 0;
  for (const CaseRecord& c : cases) n += c.passed;
  return n;
}

ordered_json VerificationReport::to_json() const {
  ordered_json j;
  j["tool"] = "qstate";
  j["version"] = version;
  j["suite"] = to_string(suite);
  j["seed"] = seed;
  j["config"] = config;
  j["summary"] = {{"cases", cases.size()}, {"passed", passed_count()}, {"all_passed", all_passed()}};
  j["cases"] = ordered_json::array();
  for (const CaseRecord& c : cases) {
    ordered_json r;
    r["index"] = c.index;
    r["name"] = c.name;
    r["passed"] = c.passed;
    r["error"] = c.error;
    r["data"] = c.data;
    if (c.image) r["image"] = c.image->summary();
    j["cases"].push_back(r);
  }
  return j;
}

VerificationReport VerificationReport::from_json(const ordered_json& j) {
  VerificationReport r;
  try {
    r.suite = suite_from_string(j.at("suite").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.version = j.at("version").get<std::string>();
    r.config = j.at("config");
    for (const ordered_json& c : j.at("cases")) {
      CaseRecord rec;
      rec.index = c.at("index").get<std::size_t>();
      rec.name = c.at("name").get<std::string>();
      rec.passed = c.at("passed").get<bool>();
      rec.error = c.at("error").get<std::string>();
      rec.data = c.at("data");
      r.cases.push_back(std::move(rec));
    }
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  return r;
}

namespace {

using CaseFn = std::function<void(CaseRecord&)>;

struct CaseSpec {
  std::string name;
  CaseFn run;
};

std::vector<CaseRecord> run_cases(const std::vector<CaseSpec>& specs) {
  std::vector<CaseRecord> out(specs.size());
  const std::int64_t n = static_cast<std::int64_t>(specs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    CaseRecord& rec = out[k];
    rec.index = static_cast<std::size_t>(k);
    rec.name = specs[k].name;
    try {
      specs[k].run(rec);
    } catch (const std::exception& e) {
      rec.passed = false;
      rec.error = e.what();
    }
  }
  return out;
}

struct Pair {
  std::string name;
  ScalarField f;
  ScalarField g;
};

std::vector<Pair> pairs_for(const RunConfig& cfg, const MeshPtr& mesh) {
  std::vector<Pair> pairs;
  if (cfg.f_expr && cfg.g_expr) {
    pairs.push_back({"fields", sample_field(mesh, *cfg.f_expr), sample_field(mesh, *cfg.g_expr)});
  }
  const std::vector<ScalarField> corpus = trig_corpus(mesh, 2 * cfg.corpus.count, cfg.corpus.k_max, cfg.seed);
  for (std::size_t i = 0; i < cfg.corpus.count; ++i) {
    pairs.push_back({"corpus-" + std::to_string(i), corpus[2 * i], corpus[2 * i + 1]});
  }
  return pairs;
}

std::vector<CaseSpec> triangle_cases(const RunConfig& cfg, const MeshPtr& mesh, const QuasiState& qs) {
  std::vector<CaseSpec> specs;
  for (Pair& p : pairs_for(cfg, mesh)) {
    const bool fixed = p.name == "fields" && cfg.triangle.margin.has_value();
    specs.push_back({p.name, [&cfg, &qs, p, fixed](CaseRecord& rec) {
                       const PiTriangle tri = pi_triangle(qs, p.f, p.g);
                       MomentMapImage img = rasterize(p.f, p.g, cfg.triangle.resolution, cfg.triangle.resolution);
                       const double margin = fixed ? *cfg.triangle.margin
                                                   : cfg.triangle.margin_cells * std::max(img.grid.dx, img.grid.dy);
                       const CoverageReport cov = check_triangle_coverage(img, tri, margin);
                       rec.data["F"] = p.f.generator();
                       rec.data["G"] = p.g.generator();
                       rec.data["zeta_F"] = tri.zeta_f;
                       rec.data["zeta_G"] = tri.zeta_g;
                       rec.data["zeta_FG"] = tri.zeta_fg;
                       rec.data["pi"] = tri.leg_length;
                       rec.data["coverage"] = cov.to_json();
                       rec.passed = cov.fraction == 1.0;
                       rec.image = std::move(img);
                     }});
  }
  return specs;
}

std::vector<CaseSpec> inequality_cases(const RunConfig& cfg, const MeshPtr& mesh, const QuasiState& qs) {
  std::vector<CaseSpec> specs;
  for (Pair& p : pairs_for(cfg, mesh)) {
    specs.push_back({p.name, [&cfg, &qs, p, mesh](CaseRecord& rec) {
                       const AreaForm form = area_form(mesh);
                       const double pi = pi_defect(qs, p.f, p.g);
                       const double norm = bracket_sup_norm(poisson_bracket(form, p.f, p.g));
                       const double rhs = form.total_area * norm;
                       const double slack = rhs - pi * pi;
                       rec.data["F"] = p.f.generator();
                       rec.data["G"] = p.g.generator();
                       rec.data["pi"] = pi;
                       rec.data["pi_squared"] = pi * pi;
                       rec.data["bracket_sup"] = norm;
                       rec.data["area_times_bracket"] = rhs;
                       rec.data["slack"] = slack;
                       rec.passed = slack >= -cfg.inequality.slack_fraction * rhs;
                     }});
  }
  return specs;
}

std::vector<CaseSpec> upsilon_cases(const RunConfig& cfg) {
  const auto& u = cfg.upsilon;
  const MeshPtr torus = build_torus_grid(u.n, u.n, 1.0);
  PerturbationProblem prob{sample_field(torus, u.f), sample_field(torus, u.g), 0.0, u.k_max, u.budget, cfg.seed};
  const std::vector<UpsilonEstimate> curve = upsilon_curve(prob, u.epsilons);

  std::vector<CaseSpec> specs;
  for (const UpsilonEstimate& est : curve) {
    specs.push_back({"epsilon-" + nlohmann::json(est.epsilon).dump(), [est, floor = u.floor](CaseRecord& rec) {
                       rec.data = est.to_json();
                       rec.data["floor"] = floor * est.base_norm;
                       rec.passed = est.best_norm >= floor * est.base_norm &&
                                    est.f_perturbation_sup < est.epsilon && est.g_perturbation_sup < est.epsilon;
                     }});
  }
  specs.push_back({"commuting", [torus, &u, seed = cfg.seed](CaseRecord& rec) {
                     PerturbationProblem c{sample_field(torus, "u"), sample_field(torus, "0.5"), 0.02, u.k_max,
                                           u.budget, seed};
                     const UpsilonEstimate est = upsilon_search(c);
                     rec.data = est.to_json();
                     rec.passed = est.best_norm == 0.0;
                   }});
  specs.push_back({"zero-budget", [prob, torus](CaseRecord& rec) {
                     PerturbationProblem z = prob;
                     z.epsilon = 0.02;
                     z.budget = 0;
                     const UpsilonEstimate est = upsilon_search(z);
                     const double direct = bracket_sup_norm(poisson_bracket(area_form(torus), z.f, z.g));
                     rec.data = est.to_json();
                     rec.data["direct_norm"] = direct;
                     rec.passed = est.best_norm == direct;
                   }});
  return specs;
}

std::vector<CaseSpec> axiom_cases(const RunConfig& cfg, const MeshPtr& mesh, const QuasiState& qs) {
  const std::vector<ScalarField> corpus = trig_corpus(mesh, 2 * cfg.corpus.count, cfg.corpus.k_max, cfg.seed);
  const double scale = cfg.axioms.tolerance_cells / 3.0;
  std::vector<CaseSpec> specs;
  for (std::size_t i = 0; i < cfg.corpus.count; ++i) {
    const ScalarField f = corpus[2 * i];
    const ScalarField g = corpus[2 * i + 1];
    specs.push_back({"corpus-" + std::to_string(i), [&qs, f, g, mesh, scale](CaseRecord& rec) {
                       auto tol = [scale](const ScalarField& x) { return scale * grid_tolerance(x); };
                       const double zf = zeta(qs, f);
                       const double zg = zeta(qs, g);
                       ordered_json checks;
                       bool ok = true;
                       auto check = [&](const char* name, double lhs, double rhs, double t) {
                         const bool pass = lhs <= rhs + t;
                         checks[name] = {{"lhs", lhs}, {"rhs", rhs}, {"tolerance", t}, {"passed", pass}};
                         ok = ok && pass;
                       };
                       const double one = zeta(qs, constant_field(mesh, 1.0));
                       checks["normalization"] = {{"zeta_one", one}, {"passed", one == 1.0}};
                       ok = ok && one == 1.0;

                       const ScalarField h = f + (g + 1.0) * 0.25;
                       check("monotone", zf, zeta(qs, h), std::max(tol(f), tol(h)));
                       check("lipschitz", std::abs(zf - zg), c0_distance(f, g), std::max(tol(f), tol(g)));
                       for (double c : {2.5, -1.5}) {
                         const ScalarField cf = f * c;
                         check(c > 0 ? "homogeneity_pos" : "homogeneity_neg", std::abs(zeta(qs, cf) - c * zf), 0.0,
                               tol(cf));
                       }
                       check("shift", std::abs(zeta(qs, f + 0.75) - (zf + 0.75)), 0.0, tol(f));
                       const ScalarField f2 = f * f;
                       check("multiplicative", std::abs(zeta(qs, f2) - zf * zf), 0.0,
                             std::max(tol(f2), 2.0 * std::abs(zf) * tol(f)));
                       if (qs.is_simple()) {
                         const double zi = zeta_via_integral(qs, f);
                         check("integral", std::abs(zi - zf), 0.0, (f.max() - f.min()) / kIntegralLevels + tol(f));
                       }
                       rec.data["F"] = f.generator();
                       rec.data["zeta_F"] = zf;
                       rec.data["checks"] = checks;
                       rec.passed = ok;
                     }});
  }
  return specs;
}

std::vector<CaseSpec> lemma_cases(const RunConfig& cfg) {
  LemmaOptions opt;
  opt.r = cfg.lemma.r;
  opt.delta = cfg.lemma.delta;
  opt.trials = std::max(1, cfg.lemma.trials);
  opt.grid = cfg.lemma.grid;
  opt.seed = cfg.seed;
  std::vector<CaseSpec> specs;
  for (int k = 0; k < cfg.lemma.trials; ++k) {
    specs.push_back({"trial-" + std::to_string(k), [opt, k](CaseRecord& rec) {
                       const LemmaTrial t = perturbed_identity_trial(opt, static_cast<std::size_t>(k));
                       rec.data = t.to_json();
                       rec.passed = t.covered;
                     }});
  }
  specs.push_back({"radial", [opt](CaseRecord& rec) {
                     const RadialReport r = radial_contraction_coverage(opt.r, opt.delta, opt.grid);
                     rec.data["inner_covered"] = r.inner_covered;
                     rec.data["outer_empty"] = r.outer_empty;
                     rec.passed = r.inner_covered && r.outer_empty;
                   }});
  return specs;
}

std::vector<CaseSpec> stability_cases(const RunConfig& cfg) {
  const auto& s = cfg.stability;
  const MeshPtr patch = build_planar_patch(s.n, s.n, s.half_extent);
  const AreaForm form = area_form(patch);
  const ScalarField f0 = sample_field(patch, s.f0);
  const ScalarField g0 = sample_field(patch, s.g0);
  std::vector<CaseSpec> specs;
  if (s.trials > 0) {
    StabilityOptions opt;
    opt.epsilon = s.epsilon;
    opt.delta = s.delta;
    opt.trials = s.trials;
    opt.seed = cfg.seed;
    opt.probe_radius = s.probe_radius;
    const StabilityReport rep = local_stability_probe(form, f0, g0, opt);
    for (std::size_t k = 0; k < rep.trials.size(); ++k) {
      specs.push_back({"trial-" + std::to_string(k), [t = rep.trials[k], witness = rep.witness](CaseRecord& rec) {
                         rec.data = t.to_json();
                         rec.data["witness"] = witness;
                         rec.passed = t.passed;
                       }});
    }
  }
  specs.push_back({"unperturbed", [form, f0, g0, s](CaseRecord& rec) {
                     const VertexId w = stability_witness(poisson_bracket(form, f0, g0));
                     const auto region = probe_region(*f0.mesh(), w, s.probe_radius);
                     const double m = probe_max_bracket(form, f0, g0, region);
                     rec.data["max_bracket"] = m;
                     rec.passed = m >= 1.0 - 1e-9;
                   }});
  specs.push_back({"scaled", [form, f0, g0, s](CaseRecord& rec) {
                     const VertexId w = stability_witness(poisson_bracket(form, f0, g0));
                     const auto region = probe_region(*f0.mesh(), w, s.probe_radius);
                     const double m = probe_max_bracket(form, f0 * (1.0 - s.delta), g0, region);
                     rec.data["max_bracket"] = m;
                     rec.passed = m >= 1.0 - s.delta - 1e-9 && m > 1.0 - s.epsilon;
                   }});
  return specs;
}

}  // namespace

VerificationReport run_verification_suite(const RunConfig& config, Suite suite) {
  VerificationReport rep;
  rep.suite = suite;
  rep.seed = config.seed;
  rep.config = config.to_json();

  // Everything that can fail validation happens before any case runs.
  MeshPtr mesh;
  std::optional<QuasiState> qs;
  if (suite == Suite::triangle || suite == Suite::inequality || suite == Suite::axioms) {
    mesh = config.build_surface();
    qs.emplace(config.build_quasi_state(mesh));
    if (config.f_expr && config.g_expr) {
      sample_field(mesh, *config.f_expr);
      sample_field(mesh, *config.g_expr);
    }
  }

  std::vector<CaseSpec> specs;
  switch (suite) {
    case Suite::triangle: specs = triangle_cases(config, mesh, *qs); break;
    case Suite::inequality: specs = inequality_cases(config, mesh, *qs); break;
    case Suite::upsilon: specs = upsilon_cases(config); break;
    case Suite::axioms: specs = axiom_cases(config, mesh, *qs); break;
    case Suite::lemma_surj: specs = lemma_cases(config); break;
    case Suite::local_stability: specs = stability_cases(config); break;
  }
  rep.cases = run_cases(specs);
  return rep;
}

namespace {

void flatten(const ordered_json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& item : j.items()) flatten(item.value(), prefix.empty() ? item.key() : prefix + "." + item.key(), out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

std::string report_csv(const VerificationReport& report) {
  std::vector<std::string> columns;
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;
  for (const CaseRecord& c : report.cases) {
    std::vector<std::pair<std::string, std::string>> row;
    flatten(c.data, "", row);
    for (const auto& [k, v] : row) {
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    }
    rows.push_back(std::move(row));
  }
  std::string out = "index,name,passed,error";
  for (const std::string& c : columns) out += "," + csv_escape(c);
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const CaseRecord& c = report.cases[r];
    out += std::to_string(c.index) + "," + csv_escape(c.name) + "," + (c.passed ? "true" : "false") + "," +
           csv_escape(c.error);
    for (const std::string& col : columns) {
      out += ",";
      for (const auto& [k, v] : rows[r]) {
        if (k == col) {
          out += csv_escape(v);
          break;
        }
      }
    }
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> render_report(const VerificationReport& report, const std::set<Format>& formats,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (formats.count(Format::json)) {
    written.push_back(dir / "report.json");
    write_file(written.back(), report.to_json().dump(2) + "\n");
  }
  if (formats.count(Format::csv)) {
    written.push_back(dir / "report.csv");
    write_file(written.back(), report_csv(report));
  }
  if (formats.count(Format::pgm)) {
    for (const CaseRecord& c : report.cases) {
      if (!c.image) continue;
      written.push_back(dir / ("case_" + std::to_string(c.index) + ".pgm"));
      write_file(written.back(), c.image->to_pgm());
    }
  }
  return written;
}

}  // namespace qstate

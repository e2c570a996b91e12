// qstate command-line front end.
//
//   qstate surface  [--config c.json] [--field EXPR] [--out DIR]
//   qstate zeta     [--config c.json] --field EXPR [--field EXPR ...]
//   qstate pi       [--config c.json] --F EXPR --G EXPR [--resolution N]
//   qstate verify   SUITE [--config c.json] [--seed S] [--out DIR] [--resolution N] [--cases N]
//   qstate report   --input report.json [--out DIR]
//
// Exit status: 0 when every case passes, 1 when some case fails, 2 on bad
// input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "qstate/momentmap.hpp"
#include "qstate/quasi.hpp"
#include "qstate/symplectic.hpp"
#include "qstate/verify.hpp"

namespace {

using namespace qstate;
using nlohmann::ordered_json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> resolution;
  std::optional<std::size_t> cases;
};

RunConfig load_config(const Common& c) {
  nlohmann::json j = nlohmann::json::object();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw std::invalid_argument("cannot read config " + c.config_path);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (c.seed) j["seed"] = *c.seed;
  if (c.resolution) j["triangle"]["resolution"] = *c.resolution;
  if (!c.out.empty()) j["output"] = c.out;
  RunConfig cfg = RunConfig::from_json(j);
  if (c.cases) cfg.set_cases(*c.cases);
  return cfg;
}

void emit(const ordered_json& j, const std::string& out_dir, const std::string& name) {
  const std::string text = j.dump(2) + "\n";
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream f(std::filesystem::path(out_dir) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write into " + out_dir);
  f << text;
}

int cmd_surface(const Common& c, const std::string& field) {
  const RunConfig cfg = load_config(c);
  const MeshPtr mesh = cfg.build_surface();
  ordered_json j = ordered_json::parse(
      (field.empty() ? mesh->to_json() : sample_field(mesh, field).to_json()).dump());
  emit(j, c.out, "surface.json");
  return 0;
}

int cmd_zeta(const Common& c, const std::vector<std::string>& fields) {
  const RunConfig cfg = load_config(c);
  const MeshPtr mesh = cfg.build_surface();
  const QuasiState qs = cfg.build_quasi_state(mesh);
  ordered_json out;
  out["quasi_state"] = qs.descriptor();
  out["results"] = ordered_json::array();
  for (const std::string& e : fields) {
    const ScalarField f = sample_field(mesh, e);
    ordered_json r;
    r["field"] = e;
    r["zeta"] = zeta(qs, f);
    if (qs.is_simple()) {
      const MedianResult m = median(qs, f);
      r["zeta_integral"] = zeta_via_integral(qs, f);
      r["complement_measures"] = m.complement_measures;
      r["tie_band"] = m.tie_band;
    }
    r["grid_tolerance"] = grid_tolerance(f);
    out["results"].push_back(r);
  }
  emit(out, c.out, "zeta.json");
  return 0;
}

int cmd_pi(const Common& c, const std::string& fe, const std::string& ge) {
  const RunConfig cfg = load_config(c);
  const MeshPtr mesh = cfg.build_surface();
  const QuasiState qs = cfg.build_quasi_state(mesh);
  const ScalarField f = sample_field(mesh, fe);
  const ScalarField g = sample_field(mesh, ge);
  const PiTriangle tri = pi_triangle(qs, f, g);
  const AreaForm form = area_form(mesh);
  const double norm = bracket_sup_norm(poisson_bracket(form, f, g));
  ordered_json out;
  out["F"] = fe;
  out["G"] = ge;
  out["zeta_F"] = tri.zeta_f;
  out["zeta_G"] = tri.zeta_g;
  out["zeta_FG"] = tri.zeta_fg;
  out["pi"] = tri.leg_length;
  out["triangle"] = {{tri.vertices[0][0], tri.vertices[0][1]},
                     {tri.vertices[1][0], tri.vertices[1][1]},
                     {tri.vertices[2][0], tri.vertices[2][1]}};
  out["bracket_sup"] = norm;
  out["area_times_bracket"] = form.total_area * norm;
  out["slack"] = form.total_area * norm - tri.leg_length * tri.leg_length;
  emit(out, c.out, "pi.json");
  return 0;
}

int cmd_verify(const Common& c, const std::string& suite_name) {
  const Suite suite = suite_from_string(suite_name);
  const RunConfig cfg = load_config(c);
  const VerificationReport rep = run_verification_suite(cfg, suite);
  const auto files = render_report(rep, {Format::json, Format::csv, Format::pgm}, cfg.output);
  for (const CaseRecord& r : rep.cases) {
    std::printf("%-4s %s%s%s\n", r.passed ? "ok" : "FAIL", r.name.c_str(), r.error.empty() ? "" : ": ",
                r.error.c_str());
  }
  std::printf("%s: %zu/%zu cases passed; %zu files in %s\n", to_string(suite), rep.passed_count(), rep.cases.size(),
              files.size(), cfg.output.string().c_str());
  return rep.all_passed() ? 0 : 1;
}

int cmd_report(const Common& c, const std::string& input) {
  std::ifstream in(input);
  if (!in) throw std::invalid_argument("cannot read report " + input);
  const VerificationReport rep = VerificationReport::from_json(nlohmann::ordered_json::parse(in));
  const std::filesystem::path dir = c.out.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out);
  render_report(rep, {Format::json, Format::csv}, dir);
  std::printf("%s: %zu/%zu cases passed\n", to_string(rep.suite), rep.passed_count(), rep.cases.size());
  return rep.all_passed() ? 0 : 1;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed (overrides the config)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--resolution", c.resolution, "moment-map raster resolution")->check(CLI::Range(16, 4096));
  app->add_option("--cases", c.cases, "number of corpus cases or trials");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simple quasi-states on discretized surfaces"};
  app.require_subcommand(1);
  Common common;

  std::string field;
  auto* surface = app.add_subcommand("surface", "export the configured mesh, or a field sampled on it");
  add_common(surface, common);
  surface->add_option("--field", field, "expression to sample");

  std::vector<std::string> fields;
  auto* zeta_cmd = app.add_subcommand("zeta", "evaluate the quasi-state on fields");
  add_common(zeta_cmd, common);
  zeta_cmd->add_option("--field", fields, "expression (repeatable)")->required();

  std::string fe, ge;
  auto* pi_cmd = app.add_subcommand("pi", "non-additivity defect, triangle and bracket norm of a pair");
  add_common(pi_cmd, common);
  pi_cmd->add_option("--F", fe, "first field")->required();
  pi_cmd->add_option("--G", ge, "second field")->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify, common);
  verify->add_option("suite", suite, "triangle|inequality|upsilon|axioms|lemma-surj|local-stability")->required();

  std::string input;
  auto* report = app.add_subcommand("report", "re-render a saved report as JSON and CSV");
  add_common(report, common);
  report->add_option("--input", input, "report.json to read")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*surface) return cmd_surface(common, field);
    if (*zeta_cmd) return cmd_zeta(common, fields);
    if (*pi_cmd) return cmd_pi(common, fe, ge);
    if (*verify) return cmd_verify(common, suite);
    if (*report) return cmd_report(common, input);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

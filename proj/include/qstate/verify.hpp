#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "qstate/momentmap.hpp"
#include "qstate/quasi.hpp"

namespace qstate {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Suite { triangle, inequality, upsilon, axioms, lemma_surj, local_stability };

const char* to_string(Suite s);
Suite suite_from_string(const std::string& s);

/// Validated run configuration. Every field has a default; see
/// RunConfig::from_json for the accepted keys.
struct RunConfig {
  struct Surface {
    Topology topology = Topology::sphere;
    int n_u = 64;
    int n_v = 128;
    double total_area = 1.0;
  } surface;

  /// {"kind": "area-median"} | {"kind": "odd-points", "heights": [...]} |
  /// {"kind": "odd-points", "points": [...]} |
  /// {"kind": "combination", "parts": [{..., "weight": w}, ...]}
  nlohmann::json quasi_state = {{"kind", "area-median"}};

  /// Explicit pair run as case 0 of the triangle and inequality suites.
  std::optional<std::string> f_expr;
  std::optional<std::string> g_expr;

  struct Corpus {
    std::size_t count = 25;
    int k_max = 3;
  } corpus;

  struct Triangle {
    int resolution = 256;
    /// Margin for the explicit pair; corpus pairs use margin_cells.
    std::optional<double> margin;
    double margin_cells = 3.0;
  } triangle;

  struct Inequality {
    double slack_fraction = 0.05;
  } inequality;

  struct Upsilon {
    int n = 64;
    std::string f = "sin(2*pi*u)";
    std::string g = "sin(2*pi*v)";
    std::vector<double> epsilons = {0.1, 0.05, 0.02};
    int k_max = 3;
    int budget = 2000;
    double floor = 0.9;
  } upsilon;

  struct Axioms {
    double tolerance_cells = 3.0;
  } axioms;

  struct Lemma {
    double r = 1.0;
    double delta = 0.2;
    int trials = 200;
    int grid = 128;
  } lemma;

  struct Stability {
    int n = 65;
    double half_extent = 1.0;
    std::string f0 = "v";
    std::string g0 = "u";
    double epsilon = 0.2;
    double delta = 0.01;
    int trials = 100;
    double probe_radius = 0.5;
  } stability;

  std::uint64_t seed = 1;
  std::filesystem::path output = "out";

  /// Parses and validates; throws std::invalid_argument naming the offending
  /// key. Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  /// Override the number of cases (corpus count, or trials for lemma-surj and
  /// local-stability).
  void set_cases(std::size_t n);

  MeshPtr build_surface() const;
  /// Builds the quasi-state described by `quasi_state` on `mesh`.
  QuasiState build_quasi_state(const MeshPtr& mesh) const;
};

struct CaseRecord {
  std::size_t index = 0;
  std::string name;
  bool passed = false;
  /// Empty unless the case threw.
  std::string error;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  /// Moment-map raster, for suites that produce one.
  std::optional<MomentMapImage> image;
};

struct VerificationReport {
  Suite suite = Suite::triangle;
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  nlohmann::ordered_json config;
  std::vector<CaseRecord> cases;

  bool all_passed() const;
  std::size_t passed_count() const;
  nlohmann::ordered_json to_json() const;
  static VerificationReport from_json(const nlohmann::ordered_json& j);
};

/// Runs the suite's cases in parallel; records come back ordered by case
/// index. A case that throws is recorded as failed with its message.
VerificationReport run_verification_suite(const RunConfig& config, Suite suite);

enum class Format { json, csv, pgm };

/// Writes report.json, report.csv and case_<i>.pgm (one per case with an
/// image) into `dir`, creating it if needed. Returns the written paths.
/// Throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> render_report(const VerificationReport& report, const std::set<Format>& formats,
                                                 const std::filesystem::path& dir);

std::string report_csv(const VerificationReport& report);

}  // namespace qstate

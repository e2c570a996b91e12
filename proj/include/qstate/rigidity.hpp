#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "qstate/mesh.hpp"
#include "qstate/symplectic.hpp"

namespace qstate {

/// cos or sin of 2 pi (k1 u + k2 v) on the unit torus chart.
struct TrigMode {
  int k1 = 0;
  int k2 = 0;
  bool sine = false;
};

/// Cos and sin modes for every wave vector with max(|k1|, |k2|) <= k_max,
/// one of each +-k pair (48 modes for k_max = 3).
std::vector<TrigMode> trig_basis(int k_max);

/// Sum of coefficient_i * mode_i sampled on a torus mesh.
ScalarField perturbation_field(const MeshPtr& mesh, int k_max, std::span<const double> coefficients);

struct PerturbationProblem {
  ScalarField f;
  ScalarField g;
  double epsilon = 0.02;
  int k_max = 3;
  /// Objective evaluations after the unperturbed pair.
  int budget = 2000;
  std::uint64_t seed = 1;
};

struct UpsilonEstimate {
  double epsilon = 0.0;
  double base_norm = 0.0;
  double best_norm = 0.0;
  std::vector<double> f_coefficients;
  std::vector<double> g_coefficients;
  /// Sup norms of the best perturbations, recomputed from the coefficients.
  double f_perturbation_sup = 0.0;
  double g_perturbation_sup = 0.0;
  int iterations_used = 0;
  std::uint64_t seed = 0;

  /// {epsilon, base_norm, best_norm, ratio, iterations, seed}
  nlohmann::ordered_json to_json() const;
};

/// Smallest ||{F + sum a_i phi_i, G + sum b_i phi_i}|| found by seeded
/// coordinate descent with restarts, subject to sup norms of both
/// perturbations below epsilon. The unperturbed pair is always a candidate,
/// so with budget 0 best_norm is exactly bracket_sup_norm({F,G}). `warm` (if
/// given, and feasible for this epsilon) is evaluated as a second free
/// candidate and seeds the first descent.
///
/// The random stream does not depend on the budget, so a larger budget
/// extends the same search and never returns a larger best_norm.
UpsilonEstimate upsilon_search(const PerturbationProblem& p, const UpsilonEstimate* warm = nullptr);

/// upsilon_search at each epsilon in ascending order, each run warm-started
/// from the previous best, so best_norm is non-increasing in epsilon.
/// Results are returned in the order of `epsilons`.
std::vector<UpsilonEstimate> upsilon_curve(const PerturbationProblem& p, std::span<const double> epsilons);

struct LemmaOptions {
  double r = 1.0;
  double delta = 0.2;
  int trials = 200;
  std::uint64_t seed = 1;
  /// Polar disk grid is grid x grid (radius x angle); the raster over
  /// [-r, r]^2 is grid x grid cells.
  int grid = 128;
  int k_max = 3;
};

struct LemmaTrial {
  bool covered = false;
  std::size_t cells_checked = 0;
  std::size_t cells_missed = 0;
  double displacement_sup = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// One trial: a random smooth displacement with max |Phi(z) - z| = 0.999 delta
/// over the grid, checked for coverage of B(r - delta - 2 cell diagonals).
LemmaTrial perturbed_identity_trial(const LemmaOptions& opt, std::size_t trial);

struct LemmaReport {
  std::vector<LemmaTrial> trials;
  double pass_fraction = 0.0;

  nlohmann::ordered_json to_json() const;
};

LemmaReport perturbed_identity_coverage(const LemmaOptions& opt);

/// The contraction z -> z (1 - delta/r), whose image is exactly B(r - delta).
struct RadialReport {
  bool inner_covered = false;
  /// No raster center farther than r - delta + one cell diagonal is covered.
  bool outer_empty = false;
};

RadialReport radial_contraction_coverage(double r, double delta, int grid);

struct StabilityOptions {
  double epsilon = 0.2;
  double delta = 0.01;
  int trials = 100;
  std::uint64_t seed = 1;
  /// Radius in chart units of the probe region U around the witness vertex.
  double probe_radius = 0.5;
  int k_max = 3;
};

struct StabilityTrial {
  double max_bracket = 0.0;
  double f_distance = 0.0;
  double g_distance = 0.0;
  bool passed = false;

  nlohmann::ordered_json to_json() const;
};

struct StabilityReport {
  VertexId witness = 0;
  std::size_t region_size = 0;
  std::vector<StabilityTrial> trials;
  double pass_fraction = 0.0;
  double min_max_bracket = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// Vertex where {F0,G0} = 1 (within 1e-6) closest to the chart center; throws
/// std::invalid_argument when there is none.
VertexId stability_witness(const BracketField& base);

/// Vertices within `radius` of the witness in the chart.
std::vector<VertexId> probe_region(const SurfaceMesh& mesh, VertexId witness, double radius);

/// max of {F,G} over the region.
double probe_max_bracket(const AreaForm& form, const ScalarField& f, const ScalarField& g,
                         std::span<const VertexId> region);

/// Random trig perturbations of F0 and G0 with sup norm 0.999 delta each; a
/// trial passes when the largest bracket over U exceeds 1 - epsilon.
StabilityReport local_stability_probe(const AreaForm& form, const ScalarField& f0, const ScalarField& g0,
                                      const StabilityOptions& opt);

}  // namespace qstate

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qstate/contour_tree.hpp"
#include "qstate/mesh.hpp"
#include "qstate/topology.hpp"

namespace qstate {

enum class MeasureKind { area_median, odd_points };

const char* to_string(MeasureKind k);

/// {0,1}-valued quasi-measure on a sphere mesh: a solid set gets 1 when its
/// reference-measure share exceeds one half.
///
/// The reference measure is either the normalized area or the uniform point
/// measure on an odd number of support vertices. Sets whose measure falls
/// within half_tolerance of 1/2 are decided by a fixed vertex (see tau_solid).
class SimpleQuasiMeasure {
 public:
  /// Normalized area weights; half_tolerance = 1.5 x the largest normalized
  /// vertex weight.
  static SimpleQuasiMeasure area_median(const MeshPtr& mesh);
  /// Mass 1/(2n+1) at each of 2n+1 distinct support vertices. A point measure
  /// never gives a set measure exactly 1/2, so half_tolerance is 0.
  static SimpleQuasiMeasure odd_points(const MeshPtr& mesh, std::vector<VertexId> support);
  /// Support vertices nearest to (sqrt(1-h^2), 0, h) for each height h.
  static SimpleQuasiMeasure odd_points_at_heights(const MeshPtr& mesh, std::span<const double> heights);

  MeasureKind kind() const { return kind_; }
  const MeshPtr& mesh() const { return mesh_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const VertexId> support() const { return support_; }
  double half_tolerance() const { return half_tolerance_; }

  double measure(const Region& region) const;

  /// {kind, points, weights, half_tolerance}
  nlohmann::ordered_json descriptor() const;

 private:
  SimpleQuasiMeasure() = default;

  MeasureKind kind_ = MeasureKind::area_median;
  MeshPtr mesh_;
  std::vector<double> weights_;
  std::vector<VertexId> support_;
  double half_tolerance_ = 0.0;
};

/// A simple quasi-state, or a finite convex combination of simple ones.
class QuasiState {
 public:
  explicit QuasiState(SimpleQuasiMeasure measure);

  bool is_simple() const { return simple_; }
  /// Throws std::logic_error unless is_simple().
  const SimpleQuasiMeasure& measure() const;
  std::span<const SimpleQuasiMeasure> parts() const { return parts_; }
  std::span<const double> weights() const { return weights_; }

  nlohmann::ordered_json descriptor() const;

  friend QuasiState convex_combination(const std::vector<std::pair<QuasiState, double>>& parts);

 private:
  QuasiState() = default;

  bool simple_ = true;
  std::vector<SimpleQuasiMeasure> parts_;
  std::vector<double> weights_;
};

/// Weighted combination of simple quasi-states. Weights must be
/// non-negative and sum to 1 within 1e-12; each part must be simple and all
/// parts must share a mesh.
QuasiState convex_combination(const std::vector<std::pair<QuasiState, double>>& parts);

struct MedianResult {
  double level_value = 0.0;
  TreePoint component;
  /// Normalized measures of the tree components around `component`.
  std::vector<double> complement_measures;
  /// True when the chosen point needed the half_tolerance band.
  bool tie_band = false;
};

/// Value of the quasi-measure on a solid region. Throws std::invalid_argument
/// for a non-solid region.
///
/// Inside the tie band the region gets 1 iff it contains the lowest-index
/// vertex among those touching the region's boundary from either side.
int tau_solid(const SimpleQuasiMeasure& qm, const Region& region);

/// Median of a field: the tree point whose complement branches all have
/// normalized measure at most 1/2 + half_tolerance. When several vertices
/// qualify they form a subtree and the midpoint of their value range is used.
MedianResult median(const QuasiState& qs, const ScalarField& field);
MedianResult median(const SimpleQuasiMeasure& qm, const ContourTree& tree);

double zeta(const QuasiState& qs, const ScalarField& field);
double zeta(const QuasiState& qs, const ContourTree& tree);

/// Aarnes' formula max F - integral of b_F over [min F, max F], with
/// b_F(x) = 1 - tau({F >= x}) sampled at 512 midpoint levels.
double zeta_via_integral(const QuasiState& qs, const ScalarField& field);

inline constexpr int kIntegralLevels = 512;

/// |zeta(F+G) - zeta(F) - zeta(G)|
double pi_defect(const QuasiState& qs, const ScalarField& f, const ScalarField& g);

/// Three times the largest change of the field across a mesh edge.
double grid_tolerance(const ScalarField& field);

}  // namespace qstate

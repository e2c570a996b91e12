#include "qstate/quasi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qstate {

const char* to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::area_median: return "area-median";
    case MeasureKind::odd_points: return "odd-points";
  }
  return "?";
}

namespace {

void require_sphere(const MeshPtr& mesh) {
  if (!mesh) throw std::invalid_argument("quasi-measure: null mesh");
  if (mesh->topology() != Topology::sphere) {
    throw std::invalid_argument("simple quasi-measures are only constructed on sphere meshes (genus 0)");
  }
}

}  // namespace

SimpleQuasiMeasure SimpleQuasiMeasure::area_median(const MeshPtr& mesh) {
  require_sphere(mesh);
  SimpleQuasiMeasure qm;
  qm.kind_ = MeasureKind::area_median;
  qm.mesh_ = mesh;
  const double total = mesh->total_area();
  qm.weights_.resize(mesh->vertex_count());
  for (VertexId v = 0; v < qm.weights_.size(); ++v) qm.weights_[v] = mesh->area_weight(v) / total;
  qm.half_tolerance_ = 1.5 * (*std::max_element(qm.weights_.begin(), qm.weights_.end()));
  return qm;
}

SimpleQuasiMeasure SimpleQuasiMeasure::odd_points(const MeshPtr& mesh, std::vector<VertexId> support) {
  require_sphere(mesh);
  std::sort(support.begin(), support.end());
  if (std::adjacent_find(support.begin(), support.end()) != support.end()) {
    throw std::invalid_argument("odd-points measure: support vertices must be distinct");
  }
  if (support.size() < 3 || support.size() % 2 == 0) {
    throw std::invalid_argument("odd-points measure needs an odd number >= 3 of support vertices");
  }
  for (VertexId v : support) {
    if (v >= mesh->vertex_count()) throw std::invalid_argument("odd-points measure: vertex out of range");
  }
  SimpleQuasiMeasure qm;
  qm.kind_ = MeasureKind::odd_points;
  qm.mesh_ = mesh;
  qm.weights_.assign(mesh->vertex_count(), 0.0);
  const double mass = 1.0 / static_cast<double>(support.size());
  for (VertexId v : support) qm.weights_[v] = mass;
  qm.support_ = std::move(support);
  qm.half_tolerance_ = 0.0;
  return qm;
}

SimpleQuasiMeasure SimpleQuasiMeasure::odd_points_at_heights(const MeshPtr& mesh, std::span<const double> heights) {
  require_sphere(mesh);
  std::vector<VertexId> support;
  for (double h : heights) {
    if (!(h >= -1.0 && h <= 1.0)) throw std::invalid_argument("odd-points measure: height outside [-1, 1]");
    support.push_back(mesh->nearest_vertex({std::sqrt(1.0 - h * h), 0.0, h}));
  }
  return odd_points(mesh, std::move(support));
}

double SimpleQuasiMeasure::measure(const Region& region) const {
  if (!region.mesh || !region.mesh->same_grid(*mesh_)) {
    throw std::invalid_argument("quasi-measure: region lives on a different mesh");
  }
  double m = 0.0;
  for (VertexId v : region.vertices) m += weights_[v];
  return m;
}

nlohmann::ordered_json SimpleQuasiMeasure::descriptor() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind_);
  j["points"] = support_;
  if (kind_ == MeasureKind::odd_points) {
    j["weights"] = std::vector<double>(support_.size(), weights_[support_.front()]);
  } else {
    j["weights"] = nlohmann::ordered_json::array();
  }
  j["half_tolerance"] = half_tolerance_;
  return j;
}

QuasiState::QuasiState(SimpleQuasiMeasure measure) : simple_(true), parts_{std::move(measure)}, weights_{1.0} {}

const SimpleQuasiMeasure& QuasiState::measure() const {
  if (!simple_) throw std::logic_error("quasi-state is a convex combination, not simple");
  return parts_.front();
}

nlohmann::ordered_json QuasiState::descriptor() const {
  if (simple_) return parts_.front().descriptor();
  nlohmann::ordered_json j;
  j["kind"] = "combination";
  j["parts"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    nlohmann::ordered_json p = parts_[k].descriptor();
    p["weight"] = weights_[k];
    j["parts"].push_back(p);
  }
  return j;
}

QuasiState convex_combination(const std::vector<std::pair<QuasiState, double>>& parts) {
  if (parts.empty()) throw std::invalid_argument("convex_combination: no parts");
  QuasiState qs;
  qs.simple_ = false;
  double sum = 0.0;
  for (const auto& [state, w] : parts) {
    if (!state.is_simple()) throw std::invalid_argument("convex_combination: every part must be simple");
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("convex_combination: negative weight");
    if (!state.measure().mesh()->same_grid(*parts.front().first.measure().mesh())) {
      throw std::invalid_argument("convex_combination: parts live on different meshes");
    }
    qs.parts_.push_back(state.measure());
    qs.weights_.push_back(w);
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("convex_combination: weights must sum to 1");
  return qs;
}

int tau_solid(const SimpleQuasiMeasure& qm, const Region& region) {
  const SurfaceMesh& mesh = *qm.mesh();
  if (!is_solid(mesh, region)) throw std::invalid_argument("tau_solid: region is not solid");
  const double mu = qm.measure(region);
  const double tol = qm.half_tolerance();
  if (mu < 0.5 - tol) return 0;
  if (mu > 0.5 + tol) return 1;
  VertexMask inside(mesh.vertex_count(), 0);
  for (VertexId v : region.vertices) inside[v] = 1;
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    for (VertexId w : mesh.neighbors(v)) {
      if (inside[w] != inside[v]) return inside[v];
    }
  }
  return 1;  // unreachable for a region with nonempty complement on a connected mesh
}

MedianResult median(const SimpleQuasiMeasure& qm, const ContourTree& tree) {
  if (!tree.mesh()->same_grid(*qm.mesh())) throw std::invalid_argument("median: field and quasi-state meshes differ");
  const std::span<const double> w = qm.weights();
  const std::vector<double> sub = tree.subtree_sums(w);
  const double total = sub[tree.root()];
  const double limit = 0.5 * total + qm.half_tolerance();

  const std::size_t n = tree.values().size();
  std::vector<double> largest(n, 0.0);
  std::vector<VertexId> qualifying;
  for (VertexId v = 0; v < n; ++v) {
    double m = 0.0;
    for (VertexId c : tree.neighbors(v)) m = std::max(m, tree.parent(c) == v ? sub[c] : total - sub[v]);
    largest[v] = m;
    if (m <= limit) qualifying.push_back(v);
  }
  if (qualifying.empty()) {
    throw std::runtime_error("median: no tree point has all complement branches within one half");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (VertexId v : qualifying) {
    lo = std::min(lo, tree.value(v));
    hi = std::max(hi, tree.value(v));
  }
  const double level = 0.5 * (lo + hi);
  VertexId best = qualifying.front();
  for (VertexId v : qualifying) {
    const double d = std::abs(tree.value(v) - level);
    const double db = std::abs(tree.value(best) - level);
    if (d < db || (d == db && tree.rank(v) < tree.rank(best))) best = v;
  }

  MedianResult r;
  r.level_value = level;
  r.component = tree.point_at(best);
  r.complement_measures = complement_branch_measures(tree, r.component, w);
  for (double& m : r.complement_measures) m /= total;
  r.tie_band = largest[best] > 0.5 * total;
  return r;
}

MedianResult median(const QuasiState& qs, const ScalarField& field) {
  const SimpleQuasiMeasure& qm = qs.measure();
  if (!field.mesh()->same_grid(*qm.mesh())) throw std::invalid_argument("median: field and quasi-state meshes differ");
  return median(qm, build_contour_tree(field));
}

double zeta(const QuasiState& qs, const ContourTree& tree) {
  double z = 0.0;
  const auto parts = qs.parts();
  const auto weights = qs.weights();
  if (parts.size() == 1) return median(parts[0], tree).level_value;
  for (std::size_t k = 0; k < parts.size(); ++k) z += weights[k] * median(parts[k], tree).level_value;
  return z;
}

double zeta(const QuasiState& qs, const ScalarField& field) {
  if (!field.mesh()->same_grid(*qs.parts().front().mesh())) {
    throw std::invalid_argument("zeta: field and quasi-state meshes differ");
  }
  return zeta(qs, build_contour_tree(field));
}

double zeta_via_integral(const QuasiState& qs, const ScalarField& field) {
  const SimpleQuasiMeasure& qm = qs.measure();
  if (!field.mesh()->same_grid(*qm.mesh())) {
    throw std::invalid_argument("zeta_via_integral: field and quasi-state meshes differ");
  }
  const double fmin = field.min();
  const double fmax = field.max();
  if (!(fmax > fmin)) return fmax;

  const ContourTree tree = build_contour_tree(field);
  const std::vector<double> sub = tree.subtree_sums(qm.weights());
  const VertexId root = tree.root();
  const double total = sub[root];
  const double limit = 0.5 * total + qm.half_tolerance();
  const std::size_t n = field.size();
  const auto bfs = tree.bfs_order();

  // For each level, the superlevel set splits into subtrees of the augmented
  // tree, each identified by its vertex nearest the root. A subtree gets
  // quasi-measure 1 when no component of its complement exceeds one half.
  std::vector<VertexId> top(n);
  std::vector<double> largest(n);
  const double step = (fmax - fmin) / kIntegralLevels;
  std::size_t ones = 0;
  for (int k = 0; k < kIntegralLevels; ++k) {
    const double x = fmin + (k + 0.5) * step;
    for (VertexId v : bfs) {
      if (tree.value(v) < x) continue;
      const std::uint32_t p = tree.parent(v);
      if (p != ContourTree::kNone && tree.value(p) >= x) {
        top[v] = top[p];
      } else {
        top[v] = v;
        largest[v] = p == ContourTree::kNone ? 0.0 : total - sub[v];
      }
      double& m = largest[top[v]];
      for (VertexId c : tree.neighbors(v)) {
        if (c != p && tree.value(c) < x) m = std::max(m, sub[c]);
      }
    }
    bool heavy = false;
    for (VertexId v : bfs) {
      if (tree.value(v) >= x && top[v] == v && largest[v] <= limit) {
        heavy = true;
        break;
      }
    }
    if (!heavy) ++ones;  // b_F(x) = 1 - tau({F >= x})
  }
  return fmax - step * static_cast<double>(ones);
}

double pi_defect(const QuasiState& qs, const ScalarField& f, const ScalarField& g) {
  require_same_mesh(f, g, "pi_defect");
  return std::abs(zeta(qs, f + g) - zeta(qs, f) - zeta(qs, g));
}

double grid_tolerance(const ScalarField& field) {
  const SurfaceMesh& mesh = *field.mesh();
  double m = 0.0;
  for (VertexId a = 0; a < mesh.vertex_count(); ++a) {
    for (VertexId b : mesh.neighbors(a)) m = std::max(m, std::abs(field[a] - field[b]));
  }
  return 3.0 * m;
}

}  // namespace qstate

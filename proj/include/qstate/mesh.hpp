#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "qstate/expr.hpp"

namespace qstate {

enum class Topology { sphere, torus, patch };

const char* to_string(Topology t);
Topology topology_from_string(const std::string& s);

using VertexId = std::uint32_t;

/// A rasterizable mesh cell: a grid quad (4 vertices) or a pole-cap triangle.
struct MeshCell {
  std::array<VertexId, 4> v{};
  std::uint8_t size = 4;
};

using Triangle = std::array<VertexId, 3>;

/// Structured grid surface with a triangulation.
///
/// Vertex (i, j) has index i * n_v + j; i runs along the first chart
/// coordinate u and j along v.
///  - sphere: u = z at row centers in (-1, 1), v = phi in [0, 2pi) periodic;
///    equal-area cylindrical grid, the extreme rows are capped by a zigzag
///    triangulation of their ring polygon.
///  - torus: (u, v) in [0, 1)^2, periodic in both directions.
///  - patch: (u, v) on a closed planar rectangle, no wraparound.
///
/// Quads are split along the (i, j)-(i+1, j+1) diagonal; adjacency is the edge
/// set of that triangulation. Immutable after construction.
class SurfaceMesh {
 public:
  Topology topology() const { return topology_; }
  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  std::size_t vertex_count() const { return params_.size(); }
  double total_area() const { return total_area_; }

  VertexId index(int i, int j) const { return static_cast<VertexId>(i * n_v_ + j); }
  int row(VertexId id) const { return static_cast<int>(id) / n_v_; }
  int col(VertexId id) const { return static_cast<int>(id) % n_v_; }

  const std::array<double, 3>& position(VertexId id) const { return positions_[id]; }
  const std::array<double, 2>& params(VertexId id) const { return params_[id]; }
  double area_weight(VertexId id) const { return weights_[id]; }
  std::span<const double> area_weights() const { return weights_; }
  double max_area_weight() const;

  std::span<const VertexId> neighbors(VertexId id) const {
    return {adj_.data() + adj_offsets_[id], adj_.data() + adj_offsets_[id + 1]};
  }
  std::size_t edge_count() const { return adj_.size() / 2; }

  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const MeshCell> cells() const { return cells_; }

  /// Grid spacing in chart units along u and v.
  double spacing_u() const { return h_u_; }
  double spacing_v() const { return h_v_; }
  bool periodic_u() const { return topology_ == Topology::torus; }
  bool periodic_v() const { return topology_ != Topology::patch; }
  /// Chart area of one grid cell (h_u * h_v).
  double cell_param_area() const { return h_u_ * h_v_; }

  /// Two meshes are compatible when they were built from the same recipe.
  bool same_grid(const SurfaceMesh& other) const;

  /// Vertex whose embedding position is closest to p.
  VertexId nearest_vertex(const std::array<double, 3>& p) const;

  nlohmann::json to_json() const;

  friend std::shared_ptr<const SurfaceMesh> build_sphere_grid(int, int, double);
  friend std::shared_ptr<const SurfaceMesh> build_torus_grid(int, int, double);
  friend std::shared_ptr<const SurfaceMesh> build_planar_patch(int, int, double);

 private:
  SurfaceMesh() = default;
  void finish_topology();

  Topology topology_ = Topology::sphere;
  int n_u_ = 0;
  int n_v_ = 0;
  double total_area_ = 0.0;
  double h_u_ = 0.0;
  double h_v_ = 0.0;
  double patch_half_extent_ = 0.0;
  std::vector<std::array<double, 3>> positions_;
  std::vector<std::array<double, 2>> params_;
  std::vector<double> weights_;
  std::vector<Triangle> triangles_;
  std::vector<MeshCell> cells_;
  std::vector<std::size_t> adj_offsets_;
  std::vector<VertexId> adj_;
};

using MeshPtr = std::shared_ptr<const SurfaceMesh>;

inline constexpr int kMinGrid = 8;
inline constexpr int kMaxGrid = 4096;

/// Equal-area (z, phi) sphere grid with every vertex weight total_area/(n_z*n_phi).
MeshPtr build_sphere_grid(int n_z, int n_phi, double total_area);
/// Flat torus grid on [0,1)^2 with equal weights total_area/(n_u*n_v).
MeshPtr build_torus_grid(int n_u, int n_v, double total_area);
/// Closed planar square [-a, a]^2 with a = half_extent; trapezoid dual-cell
/// weights, so the weights sum to (2a)^2.
MeshPtr build_planar_patch(int n_u, int n_v, double half_extent);

/// Build a mesh from its JSON description {topology, n_u, n_v, total_area}
/// (for patches total_area is the patch area).
MeshPtr build_mesh(const nlohmann::json& spec);

/// Per-vertex real values on a mesh, optionally remembering the expression
/// they were sampled from.
class ScalarField {
 public:
  ScalarField(MeshPtr mesh, std::vector<double> values, std::string generator = {});

  const MeshPtr& mesh() const { return mesh_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  const std::string& generator() const { return generator_; }

  double min() const;
  double max() const;
  double sup_norm() const;

  ScalarField operator+(const ScalarField& other) const;
  ScalarField operator-(const ScalarField& other) const;
  ScalarField operator*(const ScalarField& other) const;
  ScalarField operator+(double c) const;
  ScalarField operator*(double c) const;
  ScalarField operator-() const { return *this * -1.0; }

  template <class Fn>
  ScalarField map(Fn&& fn) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(values_[i]);
    return ScalarField(mesh_, std::move(out));
  }

  /// {topology, n_u, n_v, total_area, values}
  nlohmann::json to_json() const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
  std::string generator_;
};

ScalarField constant_field(const MeshPtr& mesh, double c);

/// Evaluate an expression at every vertex. Sphere meshes accept x, y, z;
/// torus and patch meshes accept u, v. Throws std::invalid_argument on a
/// foreign variable or a non-finite value.
ScalarField sample_field(const MeshPtr& mesh, const Expression& expr);
ScalarField sample_field(const MeshPtr& mesh, std::string_view expr);

/// Sup-norm distance max |a - b| over vertices.
double c0_distance(const ScalarField& a, const ScalarField& b);

/// Throws std::invalid_argument unless both fields live on compatible meshes.
void require_same_mesh(const ScalarField& a, const ScalarField& b, const char* what);

}  // namespace qstate

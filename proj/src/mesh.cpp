#include "qstate/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "qstate/kernels.hpp"

namespace qstate {

const char* to_string(Topology t) {
  switch (t) {
    case Topology::sphere: return "sphere";
    case Topology::torus: return "torus";
    case Topology::patch: return "patch";
  }
  return "?";
}

Topology topology_from_string(const std::string& s) {
  if (s == "sphere") return Topology::sphere;
  if (s == "torus") return Topology::torus;
  if (s == "patch") return Topology::patch;
  throw std::invalid_argument("unknown topology '" + s + "'");
}

namespace {

void check_dims(int n_u, int n_v) {
  if (n_u < kMinGrid || n_u > kMaxGrid || n_v < kMinGrid || n_v > kMaxGrid) {
    throw std::invalid_argument("grid dimensions must lie in [" + std::to_string(kMinGrid) + ", " +
                                std::to_string(kMaxGrid) + "], got " + std::to_string(n_u) + "x" +
                                std::to_string(n_v));
  }
}

void check_area(double area) {
  if (!(area > 0.0) || !std::isfinite(area)) {
    throw std::invalid_argument("total area must be a positive finite number");
  }
}

// Zigzag triangulation of the polygon ring[0..n): 0, 1, n-1, 2, n-2, ...
std::vector<Triangle> zigzag_cap(const std::vector<VertexId>& ring) {
  const int n = static_cast<int>(ring.size());
  std::vector<int> order;
  order.reserve(ring.size());
  order.push_back(0);
  int lo = 1;
  int hi = n - 1;
  bool take_lo = true;
  while (lo <= hi) {
    order.push_back(take_lo ? lo++ : hi--);
    take_lo = !take_lo;
  }
  std::vector<Triangle> tris;
  for (int k = 0; k + 2 < n; ++k) {
    tris.push_back({ring[order[k]], ring[order[k + 1]], ring[order[k + 2]]});
  }
  return tris;
}

}  // namespace

double SurfaceMesh::max_area_weight() const { return *std::max_element(weights_.begin(), weights_.end()); }

bool SurfaceMesh::same_grid(const SurfaceMesh& other) const {
  return this == &other || (topology_ == other.topology_ && n_u_ == other.n_u_ && n_v_ == other.n_v_ &&
                            total_area_ == other.total_area_);
}

VertexId SurfaceMesh::nearest_vertex(const std::array<double, 3>& p) const {
  VertexId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (VertexId i = 0; i < positions_.size(); ++i) {
    const auto& q = positions_[i];
    const double d = (q[0] - p[0]) * (q[0] - p[0]) + (q[1] - p[1]) * (q[1] - p[1]) + (q[2] - p[2]) * (q[2] - p[2]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

nlohmann::json SurfaceMesh::to_json() const {
  nlohmann::ordered_json j;
  j["topology"] = to_string(topology_);
  j["n_u"] = n_u_;
  j["n_v"] = n_v_;
  j["total_area"] = total_area_;
  j["values"] = weights_;
  return j;
}

void SurfaceMesh::finish_topology() {
  const bool wrap_u = periodic_u();
  const bool wrap_v = periodic_v();
  const int rows = wrap_u ? n_u_ : n_u_ - 1;
  const int cols = wrap_v ? n_v_ : n_v_ - 1;

  triangles_.clear();
  cells_.clear();
  triangles_.reserve(static_cast<std::size_t>(2 * rows * cols + 2 * n_v_));
  cells_.reserve(static_cast<std::size_t>(rows * cols + 2 * n_v_));
  for (int i = 0; i < rows; ++i) {
    const int i1 = (i + 1) % n_u_;
    for (int j = 0; j < cols; ++j) {
      const int j1 = (j + 1) % n_v_;
      const VertexId a = index(i, j);
      const VertexId b = index(i1, j);
      const VertexId c = index(i1, j1);
      const VertexId d = index(i, j1);
      triangles_.push_back({a, b, c});
      triangles_.push_back({a, c, d});
      cells_.push_back(MeshCell{{a, b, c, d}, 4});
    }
  }
  if (topology_ == Topology::sphere) {
    for (int i : {0, n_u_ - 1}) {
      std::vector<VertexId> ring;
      for (int j = 0; j < n_v_; ++j) ring.push_back(index(i, j));
      for (const Triangle& t : zigzag_cap(ring)) {
        triangles_.push_back(t);
        cells_.push_back(MeshCell{{t[0], t[1], t[2], t[2]}, 3});
      }
    }
  }

  std::vector<std::pair<VertexId, VertexId>> edges;
  edges.reserve(triangles_.size() * 3);
  for (const Triangle& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      VertexId a = t[k];
      VertexId b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const std::size_t n = vertex_count();
  std::vector<std::size_t> degree(n, 0);
  for (const auto& [a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }
  adj_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) adj_offsets_[i + 1] = adj_offsets_[i] + degree[i];
  adj_.assign(adj_offsets_[n], 0);
  std::vector<std::size_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    adj_[fill[a]++] = b;
    adj_[fill[b]++] = a;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i]),
              adj_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i + 1]));
  }
}

MeshPtr build_sphere_grid(int n_z, int n_phi, double total_area) {
  check_dims(n_z, n_phi);
  check_area(total_area);
  auto mesh = std::shared_ptr<SurfaceMesh>(new SurfaceMesh());
  mesh->topology_ = Topology::sphere;
  mesh->n_u_ = n_z;
  mesh->n_v_ = n_phi;
  mesh->total_area_ = total_area;
  mesh->h_u_ = 2.0 / n_z;
  mesh->h_v_ = 2.0 * std::numbers::pi / n_phi;
  const std::size_t n = static_cast<std::size_t>(n_z) * static_cast<std::size_t>(n_phi);
  mesh->positions_.resize(n);
  mesh->params_.resize(n);
  mesh->weights_.assign(n, total_area / static_cast<double>(n));
  for (int i = 0; i < n_z; ++i) {
    const double z = -1.0 + (i + 0.5) * mesh->h_u_;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * mesh->h_v_;
      const VertexId id = mesh->index(i, j);
      mesh->params_[id] = {z, phi};
      mesh->positions_[id] = {rho * std::cos(phi), rho * std::sin(phi), z};
    }
  }
  mesh->finish_topology();
  return mesh;
}

MeshPtr build_torus_grid(int n_u, int n_v, double total_area) {
  check_dims(n_u, n_v);
  check_area(total_area);
  auto mesh = std::shared_ptr<SurfaceMesh>(new SurfaceMesh());
  mesh->topology_ = Topology::torus;
  mesh->n_u_ = n_u;
  mesh->n_v_ = n_v;
  mesh->total_area_ = total_area;
  mesh->h_u_ = 1.0 / n_u;
  mesh->h_v_ = 1.0 / n_v;
  const std::size_t n = static_cast<std::size_t>(n_u) * static_cast<std::size_t>(n_v);
  mesh->positions_.resize(n);
  mesh->params_.resize(n);
  mesh->weights_.assign(n, total_area / static_cast<double>(n));
  constexpr double kMajor = 2.0;
  constexpr double kMinor = 1.0;
  for (int i = 0; i < n_u; ++i) {
    const double u = i * mesh->h_u_;
    for (int j = 0; j < n_v; ++j) {
      const double v = j * mesh->h_v_;
      const VertexId id = mesh->index(i, j);
      mesh->params_[id] = {u, v};
      const double tu = 2.0 * std::numbers::pi * u;
      const double tv = 2.0 * std::numbers::pi * v;
      const double ring = kMajor + kMinor * std::cos(tv);
      mesh->positions_[id] = {ring * std::cos(tu), ring * std::sin(tu), kMinor * std::sin(tv)};
    }
  }
  mesh->finish_topology();
  return mesh;
}

MeshPtr build_planar_patch(int n_u, int n_v, double half_extent) {
  check_dims(n_u, n_v);
  if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
    throw std::invalid_argument("patch half extent must be positive");
  }
  auto mesh = std::shared_ptr<SurfaceMesh>(new SurfaceMesh());
  mesh->topology_ = Topology::patch;
  mesh->n_u_ = n_u;
  mesh->n_v_ = n_v;
  mesh->patch_half_extent_ = half_extent;
  mesh->total_area_ = 4.0 * half_extent * half_extent;
  mesh->h_u_ = 2.0 * half_extent / (n_u - 1);
  mesh->h_v_ = 2.0 * half_extent / (n_v - 1);
  const std::size_t n = static_cast<std::size_t>(n_u) * static_cast<std::size_t>(n_v);
  mesh->positions_.resize(n);
  mesh->params_.resize(n);
  mesh->weights_.resize(n);
  for (int i = 0; i < n_u; ++i) {
    const double u = i == n_u - 1 ? half_extent : -half_extent + i * mesh->h_u_;
    const double wu = (i == 0 || i == n_u - 1) ? 0.5 : 1.0;
    for (int j = 0; j < n_v; ++j) {
      const double v = j == n_v - 1 ? half_extent : -half_extent + j * mesh->h_v_;
      const double wv = (j == 0 || j == n_v - 1) ? 0.5 : 1.0;
      const VertexId id = mesh->index(i, j);
      mesh->params_[id] = {u, v};
      mesh->positions_[id] = {u, v, 0.0};
      mesh->weights_[id] = wu * wv * mesh->h_u_ * mesh->h_v_;
    }
  }
  mesh->finish_topology();
  return mesh;
}

MeshPtr build_mesh(const nlohmann::json& spec) {
  const Topology topo = topology_from_string(spec.at("topology").get<std::string>());
  const int n_u = spec.at("n_u").get<int>();
  const int n_v = spec.at("n_v").get<int>();
  const double area = spec.value("total_area", 1.0);
  switch (topo) {
    case Topology::sphere: return build_sphere_grid(n_u, n_v, area);
    case Topology::torus: return build_torus_grid(n_u, n_v, area);
    case Topology::patch:
      check_area(area);
      return build_planar_patch(n_u, n_v, 0.5 * std::sqrt(area));
  }
  throw std::invalid_argument("unreachable topology");
}

ScalarField::ScalarField(MeshPtr mesh, std::vector<double> values, std::string generator)
    : mesh_(std::move(mesh)), values_(std::move(values)), generator_(std::move(generator)) {
  if (!mesh_) throw std::invalid_argument("scalar field needs a mesh");
  if (values_.size() != mesh_->vertex_count()) {
    throw std::invalid_argument("scalar field has " + std::to_string(values_.size()) + " values for " +
                                std::to_string(mesh_->vertex_count()) + " vertices");
  }
  for (double x : values_) {
    if (!std::isfinite(x)) throw std::invalid_argument("scalar field contains a non-finite value");
  }
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

void require_same_mesh(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.mesh()->same_grid(*b.mesh())) {
    throw std::invalid_argument(std::string(what) + ": fields live on different meshes");
  }
}

ScalarField ScalarField::operator+(const ScalarField& other) const {
  require_same_mesh(*this, other, "field sum");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + other.values_[i];
  return ScalarField(mesh_, std::move(out));
}

ScalarField ScalarField::operator-(const ScalarField& other) const {
  require_same_mesh(*this, other, "field difference");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] - other.values_[i];
  return ScalarField(mesh_, std::move(out));
}

ScalarField ScalarField::operator*(const ScalarField& other) const {
  require_same_mesh(*this, other, "field product");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] * other.values_[i];
  return ScalarField(mesh_, std::move(out));
}

ScalarField ScalarField::operator+(double c) const {
  return map([c](double x) { return x + c; });
}

ScalarField ScalarField::operator*(double c) const {
  return map([c](double x) { return x * c; });
}

nlohmann::json ScalarField::to_json() const {
  nlohmann::ordered_json j;
  j["topology"] = to_string(mesh_->topology());
  j["n_u"] = mesh_->n_u();
  j["n_v"] = mesh_->n_v();
  j["total_area"] = mesh_->total_area();
  if (!generator_.empty()) j["generator"] = generator_;
  j["values"] = values_;
  return j;
}

ScalarField constant_field(const MeshPtr& mesh, double c) {
  return ScalarField(mesh, std::vector<double>(mesh->vertex_count(), c), std::to_string(c));
}

ScalarField sample_field(const MeshPtr& mesh, const Expression& expr) {
  const bool sphere = mesh->topology() == Topology::sphere;
  const Var foreign[] = {sphere ? Var::u : Var::x, sphere ? Var::v : Var::y, sphere ? Var::u : Var::z};
  for (Var var : foreign) {
    if (expr.uses(var)) {
      throw std::invalid_argument("expression '" + expr.text() + "' uses a variable not defined on a " +
                                  to_string(mesh->topology()) + " mesh");
    }
  }
  std::vector<double> values = kernels::parallel::sample(*mesh, expr);
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("expression '" + expr.text() + "' is not finite on the mesh");
    }
  }
  return ScalarField(mesh, std::move(values), expr.text());
}

ScalarField sample_field(const MeshPtr& mesh, std::string_view expr) {
  return sample_field(mesh, Expression::parse(expr));
}

double c0_distance(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a, b, "c0_distance");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace qstate

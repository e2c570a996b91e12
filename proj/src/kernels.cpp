#include "qstate/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qstate::kernels {

VarValues vertex_vars(const SurfaceMesh& mesh, VertexId id) {
  VarValues vars{};
  const auto& p = mesh.position(id);
  const auto& uv = mesh.params(id);
  vars[static_cast<int>(Var::x)] = p[0];
  vars[static_cast<int>(Var::y)] = p[1];
  vars[static_cast<int>(Var::z)] = p[2];
  vars[static_cast<int>(Var::u)] = uv[0];
  vars[static_cast<int>(Var::v)] = uv[1];
  return vars;
}

std::vector<std::array<VertexId, 2>> edge_list(const SurfaceMesh& mesh) {
  std::vector<std::array<VertexId, 2>> edges;
  edges.reserve(mesh.edge_count());
  for (VertexId a = 0; a < mesh.vertex_count(); ++a) {
    for (VertexId b : mesh.neighbors(a)) {
      if (a < b) edges.push_back({a, b});
    }
  }
  return edges;
}

namespace {

// Derivative along one grid direction at position k of a line of n samples
// spaced h apart; `at(m)` returns sample m.
template <class At>
double line_derivative(At&& at, int k, int n, double h, bool periodic) {
  if (periodic) {
    const int kp = k + 1 == n ? 0 : k + 1;
    const int km = k == 0 ? n - 1 : k - 1;
    return (at(kp) - at(km)) / (2.0 * h);
  }
  if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (k == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

void gradient_at(const SurfaceMesh& mesh, std::span<const double> f, VertexId id, Gradient& out) {
  const int nu = mesh.n_u();
  const int nv = mesh.n_v();
  const int i = mesh.row(id);
  const int j = mesh.col(id);
  out.du[id] = line_derivative([&](int m) { return f[static_cast<std::size_t>(m) * nv + j]; }, i, nu,
                               mesh.spacing_u(), mesh.periodic_u());
  out.dv[id] = line_derivative([&](int m) { return f[static_cast<std::size_t>(i) * nv + m]; }, j, nv,
                               mesh.spacing_v(), mesh.periodic_v());
}

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Convex hull (counter-clockwise, no repeated closing point) of up to four
// points. Returns the hull size.
int small_hull(std::array<Point2, 4> pts, int n, std::array<Point2, 8>& hull) {
  std::sort(pts.begin(), pts.begin() + n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  return std::max(1, k - 1);
}

template <class Sink>
void rasterize_cell(std::span<const Point2> points, const MeshCell& cell, const RasterGrid& grid, Sink&& sink) {
  std::array<Point2, 4> pts{};
  for (int k = 0; k < cell.size; ++k) pts[k] = points[cell.v[k]];
  std::array<Point2, 8> hull{};
  const int h = small_hull(pts, cell.size, hull);
  if (h < 3) return;

  double xmin = hull[0][0], xmax = hull[0][0], ymin = hull[0][1], ymax = hull[0][1];
  double twice_area = 0.0;
  for (int k = 0; k < h; ++k) {
    xmin = std::min(xmin, hull[k][0]);
    xmax = std::max(xmax, hull[k][0]);
    ymin = std::min(ymin, hull[k][1]);
    ymax = std::max(ymax, hull[k][1]);
    twice_area += cross(hull[0], hull[k], hull[(k + 1) % h]);
  }
  if (!(twice_area > 0.0)) return;

  const int ix0 = std::max(0, static_cast<int>(std::ceil((xmin - grid.x0) / grid.dx - 0.5)));
  const int ix1 = std::min(grid.nx - 1, static_cast<int>(std::floor((xmax - grid.x0) / grid.dx - 0.5)));
  const int iy0 = std::max(0, static_cast<int>(std::ceil((ymin - grid.y0) / grid.dy - 0.5)));
  const int iy1 = std::min(grid.ny - 1, static_cast<int>(std::floor((ymax - grid.y0) / grid.dy - 0.5)));
  if (ix0 > ix1 || iy0 > iy1) return;

  // Closed-hull test with a tolerance relative to the raster scale.
  const double tol = 1e-12 * (grid.dx + grid.dy);
  std::array<double, 8> edge_len{};
  for (int k = 0; k < h; ++k) {
    const Point2& a = hull[k];
    const Point2& b = hull[(k + 1) % h];
    edge_len[k] = std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Point2 c = grid.center(ix, iy);
      bool inside = true;
      for (int k = 0; k < h && inside; ++k) {
        inside = cross(hull[k], hull[(k + 1) % h], c) >= -tol * edge_len[k];
      }
      if (inside) sink(grid.index(ix, iy));
    }
  }
}

bool cell_of(const RasterGrid& grid, const Point2& p, std::size_t& out) {
  const double fx = std::floor((p[0] - grid.x0) / grid.dx);
  const double fy = std::floor((p[1] - grid.y0) / grid.dy);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < grid.nx && fy < grid.ny)) return false;
  out = grid.index(static_cast<int>(fx), static_cast<int>(fy));
  return true;
}

template <class Sink>
void trace_segment(const Point2& a, const Point2& b, const RasterGrid& grid, Sink&& sink) {
  const double len_cells = std::max(std::abs(b[0] - a[0]) / grid.dx, std::abs(b[1] - a[1]) / grid.dy);
  const int steps = static_cast<int>(std::ceil(2.0 * len_cells)) + 1;
  std::size_t idx = 0;
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const Point2 p{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    if (cell_of(grid, p, idx)) sink(idx);
  }
}

}  // namespace

namespace serial {

std::vector<double> sample(const SurfaceMesh& mesh, const Expression& expr) {
  std::vector<double> out(mesh.vertex_count());
  for (VertexId i = 0; i < out.size(); ++i) out[i] = expr.evaluate(vertex_vars(mesh, i));
  return out;
}

Gradient chart_gradient(const SurfaceMesh& mesh, std::span<const double> f) {
  Gradient g{std::vector<double>(f.size()), std::vector<double>(f.size())};
  for (VertexId i = 0; i < f.size(); ++i) gradient_at(mesh, f, i, g);
  return g;
}

std::vector<double> bracket(const Gradient& f, const Gradient& g, std::span<const double> density) {
  std::vector<double> out(density.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (f.dv[i] * g.du[i] - f.du[i] * g.dv[i]) / density[i];
  return out;
}

std::vector<std::uint32_t> count_hull_centers(std::span<const Point2> points, CellList cells,
                                              const RasterGrid& grid) {
  std::vector<std::uint32_t> counts(grid.size(), 0);
  for (const MeshCell& cell : cells) {
    rasterize_cell(points, cell, grid, [&](std::size_t idx) { ++counts[idx]; });
  }
  return counts;
}

std::vector<std::uint8_t> trace_edges(std::span<const Point2> points,
                                      std::span<const std::array<VertexId, 2>> edges, const RasterGrid& grid) {
  std::vector<std::uint8_t> hit(grid.size(), 0);
  for (const auto& e : edges) {
    trace_segment(points[e[0]], points[e[1]], grid, [&](std::size_t idx) { hit[idx] = 1; });
  }
  return hit;
}

}  // namespace serial

namespace parallel {

std::vector<double> sample(const SurfaceMesh& mesh, const Expression& expr) {
  std::vector<double> out(mesh.vertex_count());
  constexpr std::size_t kBlock = 2048;
  const std::int64_t blocks = static_cast<std::int64_t>((out.size() + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(out.size(), lo + kBlock);
    std::vector<VarValues> vars(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) vars[i - lo] = vertex_vars(mesh, static_cast<VertexId>(i));
    expr.evaluate_batch(vars, std::span<double>(out).subspan(lo, hi - lo));
  }
  return out;
}

Gradient chart_gradient(const SurfaceMesh& mesh, std::span<const double> f) {
  Gradient g{std::vector<double>(f.size()), std::vector<double>(f.size())};
  const std::int64_t n = static_cast<std::int64_t>(f.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) gradient_at(mesh, f, static_cast<VertexId>(i), g);
  return g;
}

std::vector<double> bracket(const Gradient& f, const Gradient& g, std::span<const double> density) {
  std::vector<double> out(density.size());
  const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = (f.dv[i] * g.du[i] - f.du[i] * g.dv[i]) / density[i];
  return out;
}

std::vector<std::uint32_t> count_hull_centers(std::span<const Point2> points, CellList cells,
                                              const RasterGrid& grid) {
  std::vector<std::uint32_t> counts(grid.size(), 0);
  const std::int64_t n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel
  {
    std::vector<std::uint32_t> local(grid.size(), 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t c = 0; c < n; ++c) {
      rasterize_cell(points, cells[c], grid, [&](std::size_t idx) { ++local[idx]; });
    }
    // Integer sums commute, so the merge order does not affect the result.
#pragma omp critical
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += local[k];
  }
  return counts;
}

std::vector<std::uint8_t> trace_edges(std::span<const Point2> points,
                                      std::span<const std::array<VertexId, 2>> edges, const RasterGrid& grid) {
  std::vector<std::uint8_t> hit(grid.size(), 0);
  const std::int64_t n = static_cast<std::int64_t>(edges.size());
#pragma omp parallel
  {
    std::vector<std::uint8_t> local(grid.size(), 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t e = 0; e < n; ++e) {
      trace_segment(points[edges[e][0]], points[edges[e][1]], grid, [&](std::size_t idx) { local[idx] = 1; });
    }
#pragma omp critical
    for (std::size_t k = 0; k < hit.size(); ++k) hit[k] |= local[k];
  }
  return hit;
}

}  // namespace parallel

}  // namespace qstate::kernels

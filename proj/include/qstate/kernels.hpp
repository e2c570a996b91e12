#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel with the same
// signature; the two must produce bit-identical output. The library calls the
// parallel versions.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qstate/expr.hpp"
#include "qstate/mesh.hpp"

namespace qstate::kernels {

using Point2 = std::array<double, 2>;

/// Chart-coordinate partial derivatives of a vertex field.
struct Gradient {
  std::vector<double> du;
  std::vector<double> dv;
};

/// Uniform raster: cell (ix, iy) covers [x0 + ix*dx, x0 + (ix+1)*dx) x [...].
struct RasterGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  int nx = 0;
  int ny = 0;

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
  Point2 center(int ix, int iy) const { return {x0 + (ix + 0.5) * dx, y0 + (iy + 0.5) * dy}; }
};

/// Polygon cells over a point set; MeshCell::size is 3 or 4.
using CellList = std::span<const MeshCell>;

namespace serial {

std::vector<double> sample(const SurfaceMesh& mesh, const Expression& expr);

/// Second-order central differences in the chart, periodic where the
/// topology wraps and second-order one-sided at non-periodic borders.
Gradient chart_gradient(const SurfaceMesh& mesh, std::span<const double> f);

/// (F_v G_u - F_u G_v) / density, per vertex.
std::vector<double> bracket(const Gradient& f, const Gradient& g, std::span<const double> density);

/// For every cell, the number of cells whose image convex hull contains the
/// raster cell center (closed hulls; degenerate hulls count nothing).
std::vector<std::uint32_t> count_hull_centers(std::span<const Point2> points, CellList cells,
                                              const RasterGrid& grid);

/// Mark raster cells crossed by the image segments of the given edges and
/// the cells holding the vertex images.
std::vector<std::uint8_t> trace_edges(std::span<const Point2> points,
                                      std::span<const std::array<VertexId, 2>> edges, const RasterGrid& grid);

}  // namespace serial

namespace parallel {

std::vector<double> sample(const SurfaceMesh& mesh, const Expression& expr);
Gradient chart_gradient(const SurfaceMesh& mesh, std::span<const double> f);
std::vector<double> bracket(const Gradient& f, const Gradient& g, std::span<const double> density);
std::vector<std::uint32_t> count_hull_centers(std::span<const Point2> points, CellList cells,
                                              const RasterGrid& grid);
std::vector<std::uint8_t> trace_edges(std::span<const Point2> points,
                                      std::span<const std::array<VertexId, 2>> edges, const RasterGrid& grid);

}  // namespace parallel

/// Variable bindings used to evaluate an expression at a vertex.
VarValues vertex_vars(const SurfaceMesh& mesh, VertexId id);

/// Undirected edge list (a < b) of the mesh triangulation.
std::vector<std::array<VertexId, 2>> edge_list(const SurfaceMesh& mesh);

}  // namespace qstate::kernels

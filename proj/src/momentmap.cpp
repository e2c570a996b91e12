#include "qstate/momentmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace qstate {

double MomentMapImage::cell_diagonal() const { return std::hypot(grid.dx, grid.dy); }

std::size_t MomentMapImage::covered_count() const {
  return static_cast<std::size_t>(std::count(coverage.begin(), coverage.end(), std::uint8_t{1}));
}

nlohmann::ordered_json MomentMapImage::summary() const {
  nlohmann::ordered_json j;
  j["bounds"] = {grid.x0, grid.y0, grid.x0 + grid.nx * grid.dx, grid.y0 + grid.ny * grid.dy};
  j["resolution"] = {grid.nx, grid.ny};
  j["covered_cells"] = covered_count();
  std::map<std::uint32_t, std::size_t> hist;
  for (std::size_t k = 0; k < multiplicity.size(); ++k) {
    if (coverage[k]) ++hist[multiplicity[k]];
  }
  j["multiplicity_histogram"] = nlohmann::ordered_json::array();
  for (const auto& [m, c] : hist) j["multiplicity_histogram"].push_back({m, c});
  return j;
}

std::string MomentMapImage::to_pgm() const {
  const std::uint32_t top = multiplicity.empty() ? 0 : *std::max_element(multiplicity.begin(), multiplicity.end());
  std::string out = "P5\n" + std::to_string(grid.nx) + " " + std::to_string(grid.ny) + "\n255\n";
  out.reserve(out.size() + grid.size());
  for (int iy = grid.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const std::size_t k = grid.index(ix, iy);
      int level = 0;
      if (coverage[k] && top > 0) level = std::max(1, static_cast<int>((255ull * multiplicity[k]) / top));
      out.push_back(static_cast<char>(level));
    }
  }
  return out;
}

namespace {

void axis_layout(double lo, double hi, int n, double& origin, double& width) {
  width = hi > lo ? (hi - lo) / (n - 1) : 1.0;
  origin = lo - 0.5 * width;
}

}  // namespace

MomentMapImage rasterize(const ScalarField& f, const ScalarField& g, int nx, int ny) {
  require_same_mesh(f, g, "rasterize");
  if (nx < kMinResolution || nx > kMaxResolution || ny < kMinResolution || ny > kMaxResolution) {
    throw std::invalid_argument("rasterize: resolution must lie in [16, 4096]");
  }
  const SurfaceMesh& mesh = *f.mesh();
  MomentMapImage img;
  img.grid.nx = nx;
  img.grid.ny = ny;
  axis_layout(f.min(), f.max(), nx, img.grid.x0, img.grid.dx);
  axis_layout(g.min(), g.max(), ny, img.grid.y0, img.grid.dy);

  std::vector<Point2> points(f.size());
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = {f[i], g[i]};
  const std::vector<std::uint32_t> counts = kernels::parallel::count_hull_centers(points, mesh.cells(), img.grid);
  const auto edges = kernels::edge_list(mesh);
  std::vector<std::uint8_t> traced = kernels::parallel::trace_edges(points, edges, img.grid);

  img.coverage.resize(img.grid.size());
  img.multiplicity.resize(img.grid.size());
  for (std::size_t k = 0; k < img.grid.size(); ++k) {
    img.coverage[k] = counts[k] > 0 || traced[k];
    img.multiplicity[k] = img.coverage[k] ? std::max<std::uint32_t>(counts[k], 1) : 0;
  }
  return img;
}

PiTriangle make_pi_triangle(double zeta_f, double zeta_g, double zeta_fg) {
  PiTriangle t;
  t.zeta_f = zeta_f;
  t.zeta_g = zeta_g;
  t.zeta_fg = zeta_fg;
  t.vertices = {Point2{zeta_f, zeta_g}, Point2{zeta_f, zeta_fg - zeta_f}, Point2{zeta_fg - zeta_g, zeta_g}};
  t.leg_length = std::abs(zeta_fg - zeta_f - zeta_g);
  return t;
}

PiTriangle pi_triangle(const QuasiState& qs, const ScalarField& f, const ScalarField& g) {
  require_same_mesh(f, g, "pi_triangle");
  return make_pi_triangle(zeta(qs, f), zeta(qs, g), zeta(qs, f + g));
}

namespace {

// Counter-clockwise triangle with inward unit normals; inside_by(p) is the
// smallest signed distance from p to the three edge lines.
struct OrientedTriangle {
  std::array<Point2, 3> v;
  std::array<Point2, 3> normal;
  std::array<double, 3> offset;

  explicit OrientedTriangle(std::array<Point2, 3> pts) : v(pts) {
    const double area2 = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
    if (area2 < 0.0) std::swap(v[1], v[2]);
    for (int k = 0; k < 3; ++k) {
      const Point2& a = v[k];
      const Point2& b = v[(k + 1) % 3];
      const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
      normal[k] = {-(b[1] - a[1]) / len, (b[0] - a[0]) / len};
      offset[k] = normal[k][0] * a[0] + normal[k][1] * a[1];
    }
  }

  double inside_by(const Point2& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) d = std::min(d, normal[k][0] * p[0] + normal[k][1] * p[1] - offset[k]);
    return d;
  }
};

template <class Visit>
void lattice_in_triangle(const kernels::RasterGrid& grid, const OrientedTriangle& tri, double margin, Visit&& visit) {
  double xmin = tri.v[0][0], xmax = xmin, ymin = tri.v[0][1], ymax = ymin;
  for (const Point2& p : tri.v) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const long ix0 = static_cast<long>(std::floor((xmin - grid.x0) / grid.dx - 0.5));
  const long ix1 = static_cast<long>(std::ceil((xmax - grid.x0) / grid.dx - 0.5));
  const long iy0 = static_cast<long>(std::floor((ymin - grid.y0) / grid.dy - 0.5));
  const long iy1 = static_cast<long>(std::ceil((ymax - grid.y0) / grid.dy - 0.5));
  for (long iy = iy0; iy <= iy1; ++iy) {
    for (long ix = ix0; ix <= ix1; ++ix) {
      const Point2 c{grid.x0 + (ix + 0.5) * grid.dx, grid.y0 + (iy + 0.5) * grid.dy};
      if (tri.inside_by(c) < margin) continue;
      const bool in_raster = ix >= 0 && iy >= 0 && ix < grid.nx && iy < grid.ny;
      visit(in_raster, in_raster ? grid.index(static_cast<int>(ix), static_cast<int>(iy)) : 0);
    }
  }
}

}  // namespace

nlohmann::ordered_json CoverageReport::to_json() const {
  nlohmann::ordered_json j;
  j["fraction"] = fraction;
  j["cells_checked"] = cells_checked;
  j["cells_covered"] = cells_covered;
  j["margin"] = margin;
  j["vacuous"] = vacuous;
  return j;
}

CoverageReport check_triangle_coverage(const MomentMapImage& img, const PiTriangle& tri, double margin) {
  if (!(margin >= 0.0)) throw std::invalid_argument("check_triangle_coverage: margin must be non-negative");
  CoverageReport r;
  r.margin = margin;
  if (tri.degenerate()) {
    r.vacuous = true;
    return r;
  }
  const OrientedTriangle t(tri.vertices);
  lattice_in_triangle(img.grid, t, margin, [&](bool in_raster, std::size_t k) {
    ++r.cells_checked;
    if (in_raster && img.coverage[k]) ++r.cells_covered;
  });
  if (r.cells_checked == 0) {
    r.vacuous = true;
    return r;
  }
  r.fraction = static_cast<double>(r.cells_covered) / static_cast<double>(r.cells_checked);
  return r;
}

nlohmann::ordered_json MultiplicityReport::to_json() const {
  nlohmann::ordered_json j;
  j["fraction_multiple"] = fraction_multiple;
  j["interior_cells"] = interior_cells;
  j["raster_integral"] = raster_integral;
  j["bracket_integral"] = bracket_integral;
  j["relative_gap"] = relative_gap;
  j["vacuous"] = vacuous;
  return j;
}

MultiplicityReport multiplicity_check(const AreaForm& form, const MomentMapImage& img, const BracketField& b,
                                      const PiTriangle& tri, double interior_margin) {
  MultiplicityReport r;
  double sum = 0.0;
  for (std::uint32_t m : img.multiplicity) sum += m;
  r.raster_integral = sum * img.cell_area();
  r.bracket_integral = bracket_l1(form, b);
  const double diff = std::abs(r.raster_integral - r.bracket_integral);
  if (r.bracket_integral > 0.0) {
    r.relative_gap = diff / r.bracket_integral;
  } else {
    r.relative_gap = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }

  if (tri.degenerate()) {
    r.vacuous = true;
    return r;
  }
  const double margin = interior_margin >= 0.0 ? interior_margin : 3.0 * img.cell_diagonal();
  std::size_t multiple = 0;
  lattice_in_triangle(img.grid, OrientedTriangle(tri.vertices), margin, [&](bool in_raster, std::size_t k) {
    if (!in_raster) return;
    ++r.interior_cells;
    if (img.multiplicity[k] >= 2) ++multiple;
  });
  if (r.interior_cells == 0) {
    r.vacuous = true;
    return r;
  }
  r.fraction_multiple = static_cast<double>(multiple) / static_cast<double>(r.interior_cells);
  return r;
}

}  // namespace qstate

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qstate/kernels.hpp"
#include "qstate/mesh.hpp"
#include "qstate/quasi.hpp"
#include "qstate/symplectic.hpp"

namespace qstate {

using kernels::Point2;

/// Raster of the image of (F, G). Raster cell centers fall exactly on
/// min/max of each coordinate, so the bounds extend half a cell past them.
struct MomentMapImage {
  kernels::RasterGrid grid;
  /// Cell is hit by some mesh cell hull, mesh edge image or vertex image.
  std::vector<std::uint8_t> coverage;
  /// Number of mesh cells whose image hull contains the cell center; covered
  /// cells count at least 1.
  std::vector<std::uint32_t> multiplicity;

  double cell_area() const { return grid.dx * grid.dy; }
  double cell_diagonal() const;
  std::size_t covered_count() const;
  /// {bounds, resolution, covered_cells, multiplicity_histogram}
  nlohmann::ordered_json summary() const;
  /// Binary PGM, multiplicity scaled to 0..255 (0 = uncovered).
  std::string to_pgm() const;
};

inline constexpr int kMinResolution = 16;
inline constexpr int kMaxResolution = 4096;

MomentMapImage rasterize(const ScalarField& f, const ScalarField& g, int nx, int ny);

/// Right isosceles triangle with corner (zF, zG) and legs of length Pi along
/// the axes. vertices = {(zF, zG), (zF, zFG - zF), (zFG - zG, zG)}.
struct PiTriangle {
  std::array<Point2, 3> vertices{};
  double leg_length = 0.0;
  double zeta_f = 0.0;
  double zeta_g = 0.0;
  double zeta_fg = 0.0;

  bool degenerate() const { return !(leg_length > 0.0); }
};

PiTriangle make_pi_triangle(double zeta_f, double zeta_g, double zeta_fg);
PiTriangle pi_triangle(const QuasiState& qs, const ScalarField& f, const ScalarField& g);

struct CoverageReport {
  double fraction = 1.0;
  std::size_t cells_checked = 0;
  std::size_t cells_covered = 0;
  double margin = 0.0;
  bool vacuous = false;

  nlohmann::ordered_json to_json() const;
};

/// Fraction of raster cell centers inside the triangle shrunk inward by
/// `margin` that are covered. Lattice points outside the raster count as
/// uncovered. A degenerate triangle, or one with nothing left after
/// shrinking, gives a vacuous report with fraction 1.
CoverageReport check_triangle_coverage(const MomentMapImage& img, const PiTriangle& tri, double margin);

struct MultiplicityReport {
  /// Share of interior triangle cells with multiplicity >= 2.
  double fraction_multiple = 1.0;
  std::size_t interior_cells = 0;
  /// Sum of multiplicity times cell area.
  double raster_integral = 0.0;
  /// Integral of |{F,G}| against omega.
  double bracket_integral = 0.0;
  double relative_gap = 0.0;
  bool vacuous = false;

  nlohmann::ordered_json to_json() const;
};

/// Compares the two sides of the area formula and counts doubly covered
/// cells inside the triangle shrunk by `interior_margin` (default three cell
/// diagonals).
MultiplicityReport multiplicity_check(const AreaForm& form, const MomentMapImage& img, const BracketField& b,
                                      const PiTriangle& tri, double interior_margin = -1.0);

}  // namespace qstate

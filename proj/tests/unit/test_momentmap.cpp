#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qstate/momentmap.hpp"

using namespace qstate;

TEST_CASE("constant pair covers one cell") {
  const MeshPtr m = build_sphere_grid(16, 32, 1.0);
  const MomentMapImage img = rasterize(constant_field(m, 0.0), constant_field(m, 0.0), 16, 16);
  CHECK(img.covered_count() == 1);
  const PiTriangle tri = make_pi_triangle(0.0, 0.0, 0.0);
  CHECK(tri.degenerate());
  CHECK(check_triangle_coverage(img, tri, 0.0).vacuous);
}

TEST_CASE("a curve image stays on the diagonal") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const ScalarField z = sample_field(m, "z");
  const MomentMapImage img = rasterize(z, z, 64, 64);
  for (int iy = 0; iy < 64; ++iy) {
    for (int ix = 0; ix < 64; ++ix) {
      if (img.coverage[img.grid.index(ix, iy)]) CHECK(std::abs(ix - iy) <= 1);
    }
  }
  for (int k = 0; k < 64; ++k) CHECK(img.coverage[img.grid.index(k, k)]);
}

TEST_CASE("raster puts the extremes on cell centers") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const ScalarField f = sample_field(m, "x^2");
  const ScalarField g = sample_field(m, "y^2");
  const MomentMapImage img = rasterize(f, g, 100, 50);
  CHECK(img.grid.center(0, 0)[0] == doctest::Approx(f.min()));
  CHECK(img.grid.center(99, 0)[0] == doctest::Approx(f.max()));
  CHECK(img.grid.center(0, 49)[1] == doctest::Approx(g.max()));
  CHECK_THROWS_AS(rasterize(f, g, 8, 64), std::invalid_argument);
}

TEST_CASE("the quadratic pair covers its triangle") {
  const MeshPtr m = build_sphere_grid(96, 192, 1.0);
  const QuasiState qs(SimpleQuasiMeasure::area_median(m));
  const ScalarField f = sample_field(m, "x^2");
  const ScalarField g = sample_field(m, "y^2");
  const MomentMapImage img = rasterize(f, g, 256, 256);
  const PiTriangle tri = pi_triangle(qs, f, g);
  CHECK(tri.leg_length == doctest::Approx(1.0).epsilon(0.06));
  const CoverageReport r = check_triangle_coverage(img, tri, 0.02);
  CHECK_FALSE(r.vacuous);
  CHECK(r.cells_checked > 1000);
  CHECK(r.fraction == 1.0);

  // The image lies in {x + y <= 1}: nothing far beyond the hypotenuse.
  for (int iy = 0; iy < 256; ++iy) {
    for (int ix = 0; ix < 256; ++ix) {
      const auto c = img.grid.center(ix, iy);
      if (c[0] + c[1] > 1.0 + 3 * img.cell_diagonal()) CHECK_FALSE(img.coverage[img.grid.index(ix, iy)]);
    }
  }
}

TEST_CASE("coverage fails for a triangle outside the image") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const MomentMapImage img = rasterize(sample_field(m, "x^2"), sample_field(m, "y^2"), 64, 64);
  const CoverageReport r = check_triangle_coverage(img, make_pi_triangle(0.9, 0.9, 2.5), 0.0);
  CHECK_FALSE(r.vacuous);
  CHECK(r.fraction < 0.5);
  CHECK_THROWS_AS(check_triangle_coverage(img, make_pi_triangle(0, 0, 1), -1.0), std::invalid_argument);
}

TEST_CASE("planar identity has multiplicity one and the area formula holds") {
  const MeshPtr m = build_planar_patch(65, 65, 1.0);
  const ScalarField u = sample_field(m, "u");
  const ScalarField v = sample_field(m, "v");
  const AreaForm form = area_form(m);
  const MomentMapImage img = rasterize(u, v, 64, 64);
  const MultiplicityReport r =
      multiplicity_check(form, img, poisson_bracket(form, u, v), make_pi_triangle(-0.5, -0.5, 0.0));
  CHECK(r.fraction_multiple <= 0.05);
  CHECK(r.relative_gap <= 0.1);
}

TEST_CASE("PGM output is deterministic") {
  const MeshPtr m = build_sphere_grid(32, 64, 1.0);
  const ScalarField f = sample_field(m, "x^2");
  const ScalarField g = sample_field(m, "y^2");
  const std::string a = rasterize(f, g, 32, 32).to_pgm();
  const std::string b = rasterize(f, g, 32, 32).to_pgm();
  CHECK(a == b);
  CHECK(a.rfind("P5\n32 32\n255\n", 0) == 0);
  CHECK(a.size() == std::string("P5\n32 32\n255\n").size() + 32 * 32);
  const auto s = rasterize(f, g, 32, 32).summary();
  CHECK(s["resolution"][0] == 32);
}

#include <benchmark/benchmark.h>

#include "qstate/kernels.hpp"

using namespace qstate;

namespace {

struct Fixture {
  MeshPtr mesh = build_sphere_grid(256, 512, 1.0);
  std::vector<kernels::Point2> points;
  kernels::RasterGrid grid{-1.0, -1.0, 2.0 / 256, 2.0 / 256, 256, 256};

  Fixture() {
    const ScalarField f = sample_field(mesh, "x");
    const ScalarField g = sample_field(mesh, "y");
    for (std::size_t i = 0; i < f.size(); ++i) points.push_back({f[i], g[i]});
  }
};

const Fixture& fixture() {
  static const Fixture fx;
  return fx;
}

template <bool Parallel>
void BM_Sample(benchmark::State& state) {
  const auto& fx = fixture();
  const Expression e = Expression::parse("sin(3*x)*cos(2*y)+z^2");
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::sample(*fx.mesh, e) : kernels::serial::sample(*fx.mesh, e);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Gradient(benchmark::State& state) {
  const auto& fx = fixture();
  const ScalarField f = sample_field(fx.mesh, "x*y+z");
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::chart_gradient(*fx.mesh, f.values())
                        : kernels::serial::chart_gradient(*fx.mesh, f.values());
    benchmark::DoNotOptimize(out.du.data());
  }
}

template <bool Parallel>
void BM_HullCenters(benchmark::State& state) {
  const auto& fx = fixture();
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::count_hull_centers(fx.points, fx.mesh->cells(), fx.grid)
                        : kernels::serial::count_hull_centers(fx.points, fx.mesh->cells(), fx.grid);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Sample<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sample<true>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gradient<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gradient<true>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HullCenters<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HullCenters<true>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

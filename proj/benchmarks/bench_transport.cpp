#include <benchmark/benchmark.h>

#include "halfmoll/fields.hpp"
#include "halfmoll/geometry.hpp"
#include "halfmoll/transport.hpp"

namespace hm = halfmoll;

// Backward characteristics on every node of a d = 2 strip; range(0) = 1/h.
static void BM_SolveCharacteristics(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const hm::StripGrid grid(2, 0.5, 1.0, h);
  const auto times = hm::time_axis(0.5, h);
  const auto b = hm::builtin_field("vertical_inflow", 2);
  const auto h_data = hm::builtin_scalar("pulse", 2);
  const auto u0 = hm::builtin_scalar("gaussian(0.1, 0, 0.5)", 2);
  for (auto _ : state) benchmark::DoNotOptimize(hm::solve_characteristics(b, h_data, u0, grid, times));
  state.counters["nodes"] = static_cast<double>(grid.node_count() * times.count);
}
BENCHMARK(BM_SolveCharacteristics)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_WeakResidual(benchmark::State& state) {
  const double h = 1.0 / 64;
  const hm::StripGrid grid(2, 0.5, 1.0, h);
  const auto times = hm::time_axis(0.75, h);
  const auto b = hm::builtin_field("constant", 2);
  const auto one = hm::builtin_scalar("one", 2);
  const auto zero = hm::builtin_scalar("zero", 2);
  const auto u = hm::solve_characteristics(b, one, zero, grid, times);
  const auto phi = hm::front_test_functions(0.5, 1.0, 0.75).front();
  for (auto _ : state) benchmark::DoNotOptimize(hm::weak_residual(u, b, one, zero, phi));
}
BENCHMARK(BM_WeakResidual)->Unit(benchmark::kMillisecond);

static void BM_BandIntegral(benchmark::State& state) {
  const auto disk = hm::SmoothDomain2D::disk(1.0);
  const auto f = [](const hm::Point2& p) { return p[0] * p[0] + p[1]; };
  for (auto _ : state) benchmark::DoNotOptimize(hm::band_integral(f, disk, 0.2, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BandIntegral)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

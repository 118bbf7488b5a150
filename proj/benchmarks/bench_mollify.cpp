#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "halfmoll/fields.hpp"
#include "halfmoll/mollify.hpp"

namespace hm = halfmoll;

namespace {

double bump(std::span<const double> x, double) {
  return std::exp(-(x[0] * x[0] + (x[1] - 0.5) * (x[1] - 0.5)) / 0.02);
}

}  // namespace

// Grid-aligned commutator over a whole strip; range(0) = 1/h.
static void BM_CommutatorField(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const hm::StripGrid grid(2, 0.75, 1.5, h);
  const auto b = hm::builtin_field("rough_power(0.5)", 2);
  for (auto _ : state) benchmark::DoNotOptimize(hm::commutator_field(bump, b, 0.1, grid));
  state.counters["nodes"] = static_cast<double>(grid.node_count());
}
BENCHMARK(BM_CommutatorField)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_PointwiseCommutator(benchmark::State& state) {
  const auto b = hm::builtin_field("shear", 2);
  const std::vector<double> x{0.1, 0.4};
  const hm::MollifyOptions options{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(hm::commutator(bump, b, 0.1, x, 0.0, options));
}
BENCHMARK(BM_PointwiseCommutator)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

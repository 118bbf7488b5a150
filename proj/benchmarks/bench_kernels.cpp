#include <benchmark/benchmark.h>

#include <vector>

#include "halfmoll/kernels.hpp"
#include "halfmoll/relabel.hpp"
#include "halfmoll/stencil.hpp"

namespace hm = halfmoll;

static void BM_OneSidedKernel(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hm::eval_one_sided(x, 0.1));
    x = x < 0.1 ? x + 1e-4 : 0.0;
  }
}
BENCHMARK(BM_OneSidedKernel);

static void BM_HalfSpaceKernel3D(benchmark::State& state) {
  const std::vector<double> x{0.01, -0.02, -0.03};
  for (auto _ : state) benchmark::DoNotOptimize(hm::eval_half_space_kernel(x, 0.1, 3));
}
BENCHMARK(BM_HalfSpaceKernel3D);

static void BM_ValueStencil(benchmark::State& state) {
  const double eta = 0.1;
  const double step = eta / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hm::value_stencil(hm::StencilRole::forward, eta, step));
}
BENCHMARK(BM_ValueStencil)->RangeMultiplier(4)->Range(4, 256);

// Each call is a quadrature against the symmetric kernel.
static void BM_TruncationRelabel(benchmark::State& state) {
  const auto theta = hm::truncation_relabel(1.0, 0.05, 2.0);
  double s = -1.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta(s));
    s = s < 1.1 ? s + 1e-3 : -1.1;
  }
}
BENCHMARK(BM_TruncationRelabel);

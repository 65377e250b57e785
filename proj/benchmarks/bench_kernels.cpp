#include <benchmark/benchmark.h>

#include "polyfield/kernels.hpp"

using namespace polyfield;

static void BM_RwKernel(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rw_kernel(t, 3));
}
BENCHMARK(BM_RwKernel)->Arg(1)->Arg(16)->Arg(256);

static void BM_RwKernelRow(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  const long r = kernel_truncation_radius(t);
  for (auto _ : state) benchmark::DoNotOptimize(rw_kernel_row(t, r));
}
BENCHMARK(BM_RwKernelRow)->Arg(1)->Arg(16)->Arg(256);

static void BM_LltScaledError(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(llt_scaled_error(64.0, 0, {0, 1}));
}
BENCHMARK(BM_LltScaledError);

BENCHMARK_MAIN();

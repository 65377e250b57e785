#include <benchmark/benchmark.h>

#include "polyfield/environment.hpp"
#include "polyfield/kernels.hpp"
#include "polyfield/rng.hpp"

using namespace polyfield;

static EnvironmentConfig bench_cfg(double horizon) {
  EnvironmentConfig cfg;
  cfg.lambda = 1.0;
  cfg.horizon = horizon;
  cfg.window_halfwidth = kernel_truncation_radius(horizon);
  return cfg;
}

static void BM_EnvironmentSample(benchmark::State& state) {
  const EnvironmentConfig cfg = bench_cfg(static_cast<double>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(Environment(cfg, seed++));
}
BENCHMARK(BM_EnvironmentSample)->Arg(2)->Arg(8)->Arg(32);

static void BM_PathIntegral(benchmark::State& state) {
  const double horizon = static_cast<double>(state.range(0));
  const EnvironmentConfig cfg = bench_cfg(horizon);
  const Environment env(cfg, 7);
  Rng rng(11);
  for (auto _ : state) {
    const WalkPath path = sample_walk(0, 0.0, horizon, rng);
    benchmark::DoNotOptimize(env.path_integral(path, 0.0, horizon));
  }
}
BENCHMARK(BM_PathIntegral)->Arg(2)->Arg(8)->Arg(32);

static void BM_Occupation(benchmark::State& state) {
  const Environment env(bench_cfg(8.0), 7);
  double t = 0.0;
  for (auto _ : state) {
    t = t < 7.5 ? t + 0.01 : 0.0;
    benchmark::DoNotOptimize(env.occupation(t, 0));
  }
}
BENCHMARK(BM_Occupation);

#include <benchmark/benchmark.h>

#include "polyfield/continuum.hpp"
#include "polyfield/rng.hpp"

using namespace polyfield;

static GridSpec bench_grid(int nt) {
  GridSpec g;
  g.t_max = 1.0;
  g.nt = nt;
  g.x_min = -2.0;
  g.x_max = 2.0;
  g.nx = 2 * nt;
  return g;
}

static void BM_CellCovariance(benchmark::State& state) {
  const GridSpec g = bench_grid(16);
  for (auto _ : state) benchmark::DoNotOptimize(cell_covariance(g, g.cell(3, 5), g.cell(9, 20)));
}
BENCHMARK(BM_CellCovariance);

static void BM_FieldModelAssembly(benchmark::State& state) {
  const GridSpec g = bench_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(FieldModel(g));
}
BENCHMARK(BM_FieldModelAssembly)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_FieldSample(benchmark::State& state) {
  const FieldModel model(bench_grid(static_cast<int>(state.range(0))));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(model.sample(seed++));
}
BENCHMARK(BM_FieldSample)->Arg(8)->Arg(16);

static void BM_SeriesSolution(benchmark::State& state) {
  const FieldModel model(bench_grid(16));
  const FieldGrid f = model.sample(3);
  for (auto _ : state) benchmark::DoNotOptimize(series_solution(f, 4, 0.3, 1.0));
}
BENCHMARK(BM_SeriesSolution)->Unit(benchmark::kMillisecond);

static void BM_BrownianDoubleIntegral(benchmark::State& state) {
  Rng rng(5);
  const BrownianPath b = sample_brownian(1.0, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(brownian_double_integral(b));
}
BENCHMARK(BM_BrownianDoubleIntegral)->Arg(64)->Arg(128)->Arg(256);

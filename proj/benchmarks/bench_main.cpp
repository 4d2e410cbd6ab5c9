#include <alphacf/density.hpp>
#include <alphacf/entropy.hpp>
#include <alphacf/maps.hpp>
#include <alphacf/natext.hpp>
#include <benchmark/benchmark.h>

using namespace alphacf;

static void BM_t_alpha(benchmark::State& state) {
  const AlphaContext ctx(0.5);
  double x = 0.1234567;
  for (auto _ : state) {
    x = t_alpha(ctx, x).value;
    if (x == 0.0) x = 0.1234567;
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_t_alpha);

static void BM_birkhoff(benchmark::State& state) {
  const AlphaContext ctx(0.5);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(birkhoff_entropy(ctx, n, 0.1234567));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_birkhoff)->Arg(10000);

static void BM_ulam_matrix(benchmark::State& state) {
  const AlphaContext ctx(0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ulam_matrix(ctx, static_cast<std::size_t>(state.range(0)), {1}));
  }
}
BENCHMARK(BM_ulam_matrix)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_build_B_sets(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_B_sets(static_cast<int>(state.range(0)), 12));
}
BENCHMARK(BM_build_B_sets)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

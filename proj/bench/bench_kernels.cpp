// Serial reference vs OpenMP kernels. Single-core boxes should show parity;
// multi-core ones the parallel speedup. Outputs are asserted identical in the
// unit tests, so these loops only measure.

#include <benchmark/benchmark.h>

#include "kausal/causal_poset.hpp"
#include "kausal/nonlocality.hpp"
#include "kausal/process.hpp"

using namespace kausal;

namespace {

const std::vector<NamedString>& poset_corpus() {
  static const std::vector<NamedString> corpus = [] {
    const size_t n = 8192;
    BitString base = sample_incompressible(n, Seed::from_u64(1));
    std::vector<NamedString> c;
    for (size_t i = 0; i < 4; ++i) c.push_back({"e" + std::to_string(i), base.prefix(n - i * 1024)});
    c.push_back({"w", random_bits(Seed::from_u64(2), 1, n)});
    return c;
  }();
  return corpus;
}

void bm_census_parallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(census(uint32_t(state.range(0))));
}

void bm_census_serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(census_serial(uint32_t(state.range(0))));
}

void bm_pr_parallel_value(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pr_parallel_value(int(state.range(0))));
}

void bm_pr_parallel_value_serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pr_parallel_value_serial(int(state.range(0))));
}

void bm_build_poset(benchmark::State& state) {
  const Thresholds th;
  const Lz77Compressor lz;
  for (auto _ : state) benchmark::DoNotOptimize(build_poset(poset_corpus(), th, lz));
}

void bm_build_poset_serial(benchmark::State& state) {
  const Thresholds th;
  const Lz77Compressor lz;
  for (auto _ : state) benchmark::DoNotOptimize(build_poset_serial(poset_corpus(), th, lz));
}

}  // namespace

BENCHMARK(bm_census_parallel)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_census_serial)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_pr_parallel_value)->Arg(1)->Arg(2);
BENCHMARK(bm_pr_parallel_value_serial)->Arg(1)->Arg(2);
BENCHMARK(bm_build_poset)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_build_poset_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <map>

#include "torusperc/events.hpp"
#include "torusperc/kernel.hpp"
#include "torusperc/sampler.hpp"
#include "torusperc/threshold.hpp"
#include "torusperc/unionfind.hpp"

namespace {

using namespace torusperc;

const Kernel& bench_kernel(int n) {
  static std::map<int, Kernel> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    TorusGrid grid(2, n, 10.0);
    it = cache.emplace(n, make_kernel(KernelSpec{}, grid)).first;
  }
  return it->second;
}

void BM_DrawField(benchmark::State& state) {
  const Kernel& k = bench_kernel(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_field(k, seed++));
  }
}
BENCHMARK(BM_DrawField)->Arg(64)->Arg(128)->Arg(256);

void BM_ThresholdSweep(benchmark::State& state) {
  const Kernel& k = bench_kernel(static_cast<int>(state.range(0)));
  const FieldSample f = draw_field(k, 7);
  const EventSpec loop = loop_event(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(threshold_sweep(f, loop));
  }
}
BENCHMARK(BM_ThresholdSweep)->Arg(64)->Arg(128)->Arg(256);

void BM_UnionFind(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    PeriodicUnionFind uf(n, 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      uf.unite(i, i + 1, {0, 0, 0});
    }
    benchmark::DoNotOptimize(uf);
  }
}
BENCHMARK(BM_UnionFind)->Arg(1 << 12)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "expeval/distance.hpp"
#include "expeval/rng.hpp"

using namespace expeval;

namespace {

Tensor random_map(int size, uint64_t seed) {
  Tensor t({size, size});
  Rng rng(seed);
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform();
  return t;
}

void bench_kind(benchmark::State& state, const char* name) {
  DistanceKind kind = parse_distance(name);
  int size = static_cast<int>(state.range(0));
  Tensor a = random_map(size, 3);
  Tensor b = random_map(size, 4);
  for (auto _ : state) benchmark::DoNotOptimize(distance(kind, a, b));
}

void BM_SpearmanAbs(benchmark::State& state) { bench_kind(state, "spearman_abs"); }
void BM_L1(benchmark::State& state) { bench_kind(state, "l1"); }
void BM_L2(benchmark::State& state) { bench_kind(state, "l2"); }
void BM_Ssim(benchmark::State& state) { bench_kind(state, "ssim"); }
void BM_Dice(benchmark::State& state) { bench_kind(state, "dice"); }

BENCHMARK(BM_SpearmanAbs)->Arg(16)->Arg(32);
BENCHMARK(BM_L1)->Arg(16)->Arg(32);
BENCHMARK(BM_L2)->Arg(16)->Arg(32);
BENCHMARK(BM_Ssim)->Arg(16)->Arg(32);
BENCHMARK(BM_Dice)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "ergolab/counterexample.hpp"
#include "ergolab/covering.hpp"
#include "ergolab/dynamics.hpp"
#include "ergolab/foelner.hpp"

using namespace ergolab;

static void BM_minkowski_block_runs(benchmark::State& state) {
  // the dominant cost of the concatenated temperedness check: (-U) + A_n on
  // pattern-heavy run lists, served by the progression fast path
  BlockSequence b = build_block_sequence(1, 20351, 2);
  IntervalSet a3 = b.runs(3), a4 = b.runs(4);
  IntervalSet neg = a3.negate();
  for (auto _ : state) {
    benchmark::DoNotOptimize(neg.minkowski_sum(a4).run_count());
  }
}
BENCHMARK(BM_minkowski_block_runs)->Unit(benchmark::kMillisecond);

static void BM_block_property_a(benchmark::State& state) {
  const long long l = state.range(0);
  BlockSequence b = build_block_sequence(1, l, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_property_a(b).pass);
  }
}
BENCHMARK(BM_block_property_a)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_fluctuation_measure(benchmark::State& state) {
  CounterexampleParams p;
  p.omega = [](long long n) { return Rat(1, Int(1) << n); };
  p.stages = 1;
  CounterexampleReport rep = run_counterexample(p);
  FoelnerSequence seq = build_concatenated_foelner(1, 16, 2, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rep.f.fluctuation_measure(seq, rep.alpha, rep.beta, 4, {2})[0]);
  }
}
BENCHMARK(BM_fluctuation_measure)->Unit(benchmark::kMillisecond);

static void BM_certify_disjoint(benchmark::State& state) {
  // greedy-starving family: the flow fallback must recover
  std::vector<FiniteSubset> family;
  const int k = static_cast<int>(state.range(0));
  for (int j = 0; j < k; ++j)
    family.push_back(FiniteSubset::z_interval(10 * j, 10 * j + 40));
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify_epsilon_disjoint(family, Rat(1, 2)).feasible);
  }
}
BENCHMARK(BM_certify_disjoint)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_ergodic_average_prefix(benchmark::State& state) {
  std::vector<Rat> labels;
  for (int i = 0; i < 4096; ++i) labels.push_back(Rat(i % 5, 4));
  SampleableSystem sys = SampleableSystem::finite_cyclic(4096, std::move(labels));
  FiniteSubset window = FiniteSubset::z_interval(0, (1 << 20) - 1);
  SampleableSystem::Point x = sys.sample(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ergodic_average(sys, x, window));
  }
}
BENCHMARK(BM_ergodic_average_prefix)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

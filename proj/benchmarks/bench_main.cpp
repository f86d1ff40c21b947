#include <benchmark/benchmark.h>

#include "gwlab/bounds.hpp"
#include "gwlab/harvest.hpp"

using namespace gwlab;

static void BM_CoupledStep(benchmark::State& state) {
  const auto dist = OffspringDistribution::parse("1:0.3,2:0.4,3:0.3");
  CouplingProcess proc(dist, BiasParams(10.0, 1.0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(proc.step());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CoupledStep);

static void BM_HarvestSegments(benchmark::State& state) {
  const auto dist = OffspringDistribution::constant(2);
  HarvestOptions opts;
  opts.target_segments = state.range(0);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const HarvestResult r = harvest_segments(dist, BiasParams(10.0, 1.0), opts, seed++);
    benchmark::DoNotOptimize(r.stats.count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HarvestSegments)->Arg(10'000)->Arg(100'000);

static void BM_RejectionTrial(benchmark::State& state) {
  const auto dist = OffspringDistribution::constant(1);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const RejectionResult r = rejection_sample(dist, BiasParams(2.0, 1.0), {}, 100, seed++);
    benchmark::DoNotOptimize(r.accepted);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RejectionTrial);

static void BM_ThresholdSearch(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(threshold_search(1, CVariant::closed_form).beta_star);
  }
}
BENCHMARK(BM_ThresholdSearch);

static void BM_EnumeratePaths(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_paths(static_cast<int>(state.range(0)),
                                             RegenMode::strict)
                                 .evaluated);
  }
}
BENCHMARK(BM_EnumeratePaths)->Arg(12)->Arg(16);

BENCHMARK_MAIN();

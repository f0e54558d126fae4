#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "redistrict/bisg.hpp"
#include "redistrict/fixtures.hpp"
#include "redistrict/mergesplit.hpp"
#include "redistrict/noise.hpp"
#include "redistrict/random.hpp"
#include "redistrict/smc.hpp"
#include "redistrict/spanning_tree.hpp"

using namespace redistrict;

namespace {

RegionData square_state(int side) {
  fixtures::StateSpec spec;
  spec.rows = side;
  spec.cols = side;
  return fixtures::synthetic_state(spec);
}

ConstraintConfig parity(double tolerance) {
  ConstraintConfig c;
  c.pop_tolerance = tolerance;
  return c;
}

void BM_UniformSpanningTree(benchmark::State& state) {
  const auto region = square_state(static_cast<int>(state.range(0)));
  std::vector<int> all(region.graph.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(uniform_spanning_tree(region.graph, all, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(all.size()));
}
BENCHMARK(BM_UniformSpanningTree)->Arg(10)->Arg(20)->Arg(40);

void BM_BalancedCuts(benchmark::State& state) {
  const auto region = square_state(10);
  std::vector<int> all(region.graph.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  Rng rng(2);
  const auto tree = uniform_spanning_tree(region.graph, all, rng);
  const auto& pops = region.scenarios[0].population;
  const double target = static_cast<double>(region.scenarios[0].total_population()) / 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(balanced_cut_edges(tree, pops, target, 0.05, 5));
}
BENCHMARK(BM_BalancedCuts);

void BM_SmcPlans(benchmark::State& state) {
  const auto region = square_state(10);
  SmcOptions options;
  options.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_plans_smc(region.graph, region.scenarios[0], 5, parity(0.01), static_cast<std::size_t>(state.range(0)), 3, options));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SmcPlans)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MergeSplitSteps(benchmark::State& state) {
  const auto region = square_state(10);
  const auto& census = region.scenarios[0];
  const auto start = sample_plans_smc(region.graph, census, 5, parity(0.05), 1, 4).plans[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(mergesplit_chain(region.graph, census, start, parity(0.05),
                                              ChainOptions{static_cast<std::size_t>(state.range(0)), 1, 0}, 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MergeSplitSteps)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PerturbScenario(benchmark::State& state) {
  const auto region = square_state(static_cast<int>(state.range(0)));
  noise::NoiseSpec spec;
  spec.scale = 4.0;
  for (auto _ : state) {
    ++spec.seed;
    benchmark::DoNotOptimize(noise::perturb_scenario(region.graph, region.scenarios[0], spec, "noisy"));
  }
}
BENCHMARK(BM_PerturbScenario)->Arg(10)->Arg(40);

void BM_BisgPosterior(benchmark::State& state) {
  const auto region = square_state(10);
  const auto tables = fixtures::synthetic_name_tables(50, 1);
  const auto voters = fixtures::synthetic_voters(region.graph, region.scenarios[0], tables, 10, 2);
  const auto prior = bisg::build_geo_prior(region.graph, region.scenarios[0]);
  for (auto _ : state) {
    for (const auto& v : voters) benchmark::DoNotOptimize(bisg::posterior_race(v, tables, prior));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(voters.size()));
}
BENCHMARK(BM_BisgPosterior);

}  // namespace

BENCHMARK_MAIN();

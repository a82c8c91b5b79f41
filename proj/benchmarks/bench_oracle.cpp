#include <benchmark/benchmark.h>

#include "nemco/oracle.hpp"
#include "nemco/rng.hpp"
#include "test_support.hpp"

using namespace nemco;
using namespace nemco::testing;

static void BM_solve_deterministic(benchmark::State& state) {
  DeterministicProblem problem;
  problem.config = paper_scale_config();
  CounterRng rng(7, 0);
  problem.realization.resize(16);
  for (double& r : problem.realization) r = 3.0 * rng.uniform01();
  for (auto _ : state) {
    const TrajectorySolution sol = solve_deterministic(problem);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(BM_solve_deterministic)->Unit(benchmark::kMillisecond);

static void BM_brute_force_dp(benchmark::State& state) {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const auto nodes = point_nodes({0.8, 0.3});
  for (auto _ : state) {
    const BruteForceResult dp = brute_force_dp(cfg, nodes);
    benchmark::DoNotOptimize(dp.value_at(0, cfg.s0, cfg.y0));
  }
}
BENCHMARK(BM_brute_force_dp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

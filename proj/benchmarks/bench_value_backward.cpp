#include <benchmark/benchmark.h>

#include "nemco/distribution.hpp"
#include "nemco/value_backward.hpp"
#include "test_support.hpp"

using namespace nemco;
using namespace nemco::testing;

static void BM_backward_induct(benchmark::State& state) {
  const HouseholdConfig cfg = paper_scale_config();
  const int nodes = static_cast<int>(state.range(0));
  const std::vector<std::vector<QuadNode>> renewable(
      static_cast<size_t>(cfg.horizon()),
      make_quadrature(DistributionSpec::truncated_normal(1.8, 0.9, 0.0, 6.0),
                      QuadratureSpec{nodes}));
  const std::vector<double> grid = make_y_grid(cfg, 16.0);
  for (auto _ : state) {
    const ValueTable table = backward_induct(cfg, renewable, grid);
    benchmark::DoNotOptimize(table.vbar.back());
  }
}
BENCHMARK(BM_backward_induct)->Arg(16)->Arg(64);

static void BM_compute_thresholds(benchmark::State& state) {
  const HouseholdConfig cfg = paper_scale_config();
  const std::vector<std::vector<QuadNode>> renewable(
      static_cast<size_t>(cfg.horizon()),
      make_quadrature(DistributionSpec::truncated_normal(1.8, 0.9, 0.0, 6.0),
                      QuadratureSpec{64}));
  const ValueTable table =
      backward_induct(cfg, renewable, make_y_grid(cfg, 16.0));
  for (auto _ : state) {
    const ThresholdTable thresholds = compute_thresholds(cfg, table);
    benchmark::DoNotOptimize(thresholds.rows.back().tau);
  }
}
BENCHMARK(BM_compute_thresholds);

static void BM_w_inverse(benchmark::State& state) {
  const HouseholdConfig cfg = paper_scale_config();
  const std::vector<std::vector<QuadNode>> renewable(
      static_cast<size_t>(cfg.horizon()),
      make_quadrature(DistributionSpec::truncated_normal(1.8, 0.9, 0.0, 6.0),
                      QuadratureSpec{64}));
  const ValueTable table =
      backward_induct(cfg, renewable, make_y_grid(cfg, 16.0));
  const ConcavePLFunction& f = table.at(4);
  double price = 0.0;
  for (auto _ : state) {
    price = price > 0.9 ? 0.05 : price + 0.013;
    benchmark::DoNotOptimize(f.w_inverse(price));
  }
}
BENCHMARK(BM_w_inverse);

BENCHMARK_MAIN();

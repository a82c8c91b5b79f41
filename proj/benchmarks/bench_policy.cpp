#include <benchmark/benchmark.h>

#include "nemco/model.hpp"
#include "nemco/policy.hpp"
#include "nemco/value_backward.hpp"
#include "test_support.hpp"

using namespace nemco;
using namespace nemco::testing;

namespace {

struct Setup {
  HouseholdConfig cfg = paper_scale_config();
  ValueTable values;
  ThresholdTable thresholds;

  Setup()
      : values(backward_induct(
            cfg,
            std::vector<std::vector<QuadNode>>(
                static_cast<size_t>(cfg.horizon()),
                make_quadrature(DistributionSpec::truncated_normal(1.8, 0.9,
                                                                   0.0, 6.0),
                                QuadratureSpec{64})),
            make_y_grid(cfg, 16.0))),
        thresholds(compute_thresholds(cfg, values)) {}

  State state(int t, double s, double y, double r) const {
    State st;
    st.t = t;
    st.s = s;
    st.y = y;
    st.r = r;
    st.price_plus = cfg.tariff.price_plus(t);
    st.price_minus = cfg.tariff.price_minus(t);
    return st;
  }
};

const Setup& setup() {
  static Setup s;
  return s;
}

}  // namespace

static void BM_myopic_policy(benchmark::State& state) {
  const Setup& s = setup();
  double r = 0.0;
  for (auto _ : state) {
    r = r > 6.0 ? 0.0 : r + 0.37;
    const PolicyDecision dec = myopic_policy(s.state(4, 6.75, 7.2, r),
                                             s.thresholds, s.values.at(5),
                                             s.cfg);
    benchmark::DoNotOptimize(dec.action.e);
  }
}
BENCHMARK(BM_myopic_policy);

static void BM_procrastination_policy(benchmark::State& state) {
  const Setup& s = setup();
  double r = 0.0;
  for (auto _ : state) {
    r = r > 6.0 ? 0.0 : r + 0.37;
    const PolicyDecision dec = procrastination_policy(
        s.state(4, 6.75, 7.2, r), s.thresholds, s.values.at(5), s.cfg);
    benchmark::DoNotOptimize(dec.action.v);
  }
}
BENCHMARK(BM_procrastination_policy);

static void BM_solve_nu(benchmark::State& state) {
  const Setup& s = setup();
  const ConcavePLFunction& vbar = s.values.at(5);
  const double lo = s.cfg.tariff.pi_off_minus;
  const double hi = s.cfg.tariff.pi_off_plus;
  const double load_hi = ev_clip(7.2, vbar.w_inverse(lo), s.cfg.v_max) +
                         aggregate_consumption(lo, s.cfg.devices);
  for (auto _ : state) {
    const NuSolution nu = solve_nu(0.7 * load_hi, 7.2, lo, hi, s.cfg.devices,
                                   vbar, s.cfg.v_max);
    benchmark::DoNotOptimize(nu.nu);
  }
}
BENCHMARK(BM_solve_nu);

BENCHMARK_MAIN();

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "nemco/model.hpp"
#include "nemco/oracle.hpp"
#include "nemco/policy.hpp"
#include "nemco/value_backward.hpp"
#include "test_support.hpp"

using namespace nemco;
using namespace nemco::testing;

namespace {

ValueTable induct_tiny(const HouseholdConfig& cfg,
                       std::initializer_list<double> rs) {
  return backward_induct(cfg, point_nodes(rs), make_y_grid(cfg, cfg.y0));
}

// Expected consumption-only surplus at one interval, by scanning d.
double static_surplus(const HouseholdConfig& cfg, double pip, double pim,
                      double r) {
  const DeviceUtility& dev = cfg.devices.front();
  double best = -1e300;
  for (double d = 0.0; d <= dev.d_max + 1e-12; d += 1e-4) {
    best = std::max(best, dev.utility(d) -
                              nem_payment(d - r, pip, pim, cfg.tariff.pi_zero));
  }
  return best;
}

}  // namespace

TEST_CASE("grid always contains 0, y_max, and charger multiples") {
  HouseholdConfig cfg = tiny_two_interval_config();
  cfg.y0 = 3.7;
  const auto grid = make_y_grid(cfg, cfg.y0);
  CHECK(grid.front() == doctest::Approx(0.0));
  CHECK(grid.back() == doctest::Approx(3.7));
  for (double m = cfg.v_max; m < cfg.y0; m += cfg.v_max) {
    bool found = false;
    for (double g : grid) found = found || std::abs(g - m) < 1e-12;
    CHECK(found);
  }
  for (size_t k = 0; k + 1 < grid.size(); ++k) {
    CHECK(grid[k + 1] - grid[k] <= cfg.v_max / 4.0 + 1e-12);
  }
}

TEST_CASE("single-interval value matches exhaustive search") {
  HouseholdConfig cfg = storage_free(tiny_two_interval_config());
  cfg.tariff.horizon_T = 1;
  cfg.tariff.off1 = {0, 1};
  cfg.tariff.on = {1, 1};
  cfg.tariff.off2 = {1, 1};
  const double r = 0.45;
  const ValueTable table = induct_tiny(cfg, {r});

  const ConcavePLFunction& terminal = table.at(1);
  for (double y : {0.0, 0.3, 0.74, 1.0, 1.28, 1.5}) {
    const SearchResult ref = search_storage_free_step(
        cfg, terminal, cfg.tariff.pi_off_plus, cfg.tariff.pi_off_minus, y, r);
    CHECK(table.at(0)(y) == doctest::Approx(ref.value).epsilon(2e-3));
  }
  // Demand beyond the charge cap is pure penalty: slope -alpha there.
  const double probe = cfg.v_max + 0.2;
  CHECK(table.at(0).right_slope(probe) == doctest::Approx(-cfg.alpha));
}

TEST_CASE("zero demand reduces to consumption-only surplus") {
  HouseholdConfig cfg = storage_free(tiny_two_interval_config());
  const double r0 = 0.8, r1 = 0.3;
  const ValueTable table = induct_tiny(cfg, {r0, r1});
  const double expected =
      static_surplus(cfg, cfg.tariff.pi_off_plus, cfg.tariff.pi_off_minus, r0) +
      static_surplus(cfg, cfg.tariff.pi_off_plus, cfg.tariff.pi_off_minus, r1);
  CHECK(table.at(0)(0.0) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("two-interval value table matches brute-force DP") {
  HouseholdConfig cfg = storage_free(tiny_two_interval_config());
  const ValueTable table = induct_tiny(cfg, {0.8, 0.3});

  // Frozen closed-form values (verified against the DP below).
  CHECK(table.at(1)(0.0) == doctest::Approx(0.34));
  CHECK(table.at(1)(1.0) == doctest::Approx(-0.26));
  CHECK(table.at(1)(1.5) == doctest::Approx(-0.76));
  CHECK(table.at(0)(0.0) == doctest::Approx(0.98));
  CHECK(table.at(0)(1.5) == doctest::Approx(0.08));

  BruteForceOptions opt;
  opt.resolution = 1e-3;
  const BruteForceResult dp =
      brute_force_dp(cfg, point_nodes({0.8, 0.3}), opt);
  for (double y : {0.0, 0.25, 0.5, 1.0, 1.25, 1.5}) {
    CHECK(table.at(0)(y) == doctest::Approx(dp.value_at(0, 0.0, y)).epsilon(5e-3));
    CHECK(table.at(1)(y) == doctest::Approx(dp.value_at(1, 0.0, y)).epsilon(5e-3));
  }
}

TEST_CASE("w_inverse recovers the grid-purchase threshold from the table") {
  HouseholdConfig cfg = storage_free(tiny_two_interval_config());
  const ValueTable table = induct_tiny(cfg, {0.8, 0.3});
  CHECK(table.at(1).w_inverse(cfg.tariff.pi_off_plus) == doctest::Approx(1.0));

  // Independent slope scan over the brute-force value table.
  BruteForceOptions opt;
  opt.resolution = 1e-3;
  const BruteForceResult dp = brute_force_dp(cfg, point_nodes({0.8, 0.3}), opt);
  double largest = 0.0;
  const double h = 1e-3;
  for (double y = 0.0; y + h <= cfg.y0 + 1e-12; y += h) {
    const double slope = (dp.value_at(1, 0.0, y + h) - dp.value_at(1, 0.0, y)) / h;
    if (slope >= -cfg.tariff.pi_off_plus - 1e-6) largest = y + h;
  }
  CHECK(largest == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("threshold closed forms and table on the tiny config") {
  HouseholdConfig cfg = tiny_two_interval_config();
  const ValueTable table = induct_tiny(cfg, {0.8, 0.3});
  const ThresholdTable thresholds = compute_thresholds(cfg, table);
  REQUIRE(thresholds.rows.size() == 2);
  CHECK(thresholds.at(0).tau == doctest::Approx(1.0));
  CHECK(thresholds.at(0).delta == doctest::Approx(0.0));
  CHECK(thresholds.at(0).sigma_plus == doctest::Approx(0.0));
  CHECK(thresholds.at(0).sigma_minus == doctest::Approx(0.0));
  CHECK(thresholds.at(1).tau == doctest::Approx(0.0));
  CHECK_FALSE(thresholds.at(0).ordering_ok);  // sigma/delta tie at zero
}

TEST_CASE("on-peak procrastination threshold is the remaining capacity") {
  HouseholdConfig cfg = tiny_two_interval_config();
  cfg.tariff.horizon_T = 5;
  cfg.tariff.off1 = {0, 0};
  cfg.tariff.on = {0, 5};
  cfg.tariff.off2 = {5, 5};
  cfg.y0 = 4.0;
  const ValueTable table =
      backward_induct(cfg, point_nodes({0.4, 0.4, 0.4, 0.4, 0.4}),
                      make_y_grid(cfg, cfg.y0));
  const ThresholdTable thresholds = compute_thresholds(cfg, table);
  CHECK(thresholds.at(2).tau == doctest::Approx(2.0 * cfg.v_max));
  // On-peak with no trailing off-peak: export threshold is zero.
  CHECK(thresholds.at(2).delta == doctest::Approx(0.0));
}

TEST_CASE("renewable-axis boundaries on the tiny config") {
  HouseholdConfig cfg = tiny_two_interval_config();
  const ValueTable table = induct_tiny(cfg, {0.8, 0.3});
  const ThresholdTable thresholds = compute_thresholds(cfg, table);
  const DeltaBounds b = delta_boundaries(0, 1.5, 5.0, cfg, thresholds);
  CHECK(b.delta_plus == doctest::Approx(1.3));
  CHECK(b.delta_minus == doctest::Approx(2.8));
  CHECK(b.dplus_prime == doctest::Approx(0.8));
  CHECK(b.d1 == doctest::Approx(1.6111111111));
  CHECK(b.d2 == doctest::Approx(2.1111111111));
  CHECK(b.d3 == doctest::Approx(2.28));
  CHECK(b.d4 == doctest::Approx(2.78));
  CHECK(b.dminus_prime == doctest::Approx(3.3));
}

TEST_CASE("boundaries collapse without storage headroom") {
  HouseholdConfig cfg = tiny_two_interval_config();
  cfg.e_dis_max = 0.0;
  cfg.s0 = cfg.capacity_B;  // no charge headroom either
  const ValueTable table = induct_tiny(cfg, {0.8, 0.3});
  const ThresholdTable thresholds = compute_thresholds(cfg, table);
  const DeltaBounds b = delta_boundaries(0, 1.5, cfg.s0, cfg, thresholds);
  CHECK(b.dplus_prime == doctest::Approx(b.delta_plus));
  CHECK(b.d1 == doctest::Approx(b.d2));
  CHECK(b.d3 == doctest::Approx(b.d4));
  CHECK(b.dminus_prime == doctest::Approx(b.delta_minus));
}

TEST_CASE("boundaries with demand below the export threshold") {
  HouseholdConfig cfg = tiny_two_interval_config();
  cfg.tariff.horizon_T = 3;
  cfg.tariff.off1 = {0, 0};
  cfg.tariff.on = {0, 1};
  cfg.tariff.off2 = {1, 3};
  const ValueTable table = induct_tiny(cfg, {0.5, 0.5, 0.5});
  const ThresholdTable thresholds = compute_thresholds(cfg, table);
  const double delta0 = thresholds.at(0).delta;
  if (delta0 > 0.0) {
    const double y = 0.5 * delta0;
    const DeltaBounds b = delta_boundaries(0, y, 5.0, cfg, thresholds);
    CHECK(b.delta_minus ==
          doctest::Approx(aggregate_consumption(cfg.tariff.pi_on_minus,
                                                cfg.devices)));
  }
}

TEST_CASE("value functions stay concave with slopes in [-alpha, 0]") {
  CounterRng rng(2024, 0);
  for (int trial = 0; trial < 12; ++trial) {
    const HouseholdConfig cfg = random_config(rng, 3 + trial % 3);
    const auto nodes = random_nodes(rng, cfg.horizon(), 1.5);
    const ValueTable table =
        backward_induct(cfg, nodes, make_y_grid(cfg, cfg.y0));
    CHECK(table.max_concavity_violation <= 1e-6);
    for (const ConcavePLFunction& f : table.vbar) {
      for (double slope : f.slopes()) {
        CHECK(slope <= 1e-9);
        CHECK(slope >= -cfg.alpha - 1e-9);
      }
    }
  }
}

TEST_CASE("threshold recursion and ordering on random configs") {
  CounterRng rng(99, 0);
  for (int trial = 0; trial < 12; ++trial) {
    const int T = 3 + trial % 4;
    const HouseholdConfig cfg = random_config(rng, T);
    const auto grid = make_y_grid(cfg, cfg.y0);
    double spacing = 0.0;
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
      spacing = std::max(spacing, grid[k + 1] - grid[k]);
    }
    const ValueTable table =
        backward_induct(cfg, random_nodes(rng, T, 1.0), grid);
    const ThresholdTable thresholds = compute_thresholds(cfg, table);

    const auto interval_gap = [](double lo1, double hi1, double lo2,
                                 double hi2) {
      return std::max({0.0, lo1 - hi2, lo2 - hi1});
    };
    for (int t = 0; t < T; ++t) {
      const ThresholdRow& row = thresholds.at(t);
      CHECK(row.tau >= row.sigma_plus - 1e-9);
      CHECK(row.sigma_plus >= row.sigma_minus - 1e-9);
      CHECK(row.sigma_minus >= row.delta - 1e-9);
      if (t + 1 >= T || cfg.tariff.period_of(t) != cfg.tariff.period_of(t + 1)) {
        continue;
      }
      const ThresholdRow& next = thresholds.at(t + 1);
      const Period period = cfg.tariff.period_of(t);
      // Flat stretches at the query price make the threshold a face; the
      // recursion is then a statement about the tie intervals.
      if (period == Period::On && !cfg.tariff.off2.empty()) {
        const double price = cfg.tariff.pi_on_minus;
        CHECK(interval_gap(table.at(t + 1).w_inverse_strict(price),
                           table.at(t + 1).w_inverse(price),
                           table.at(t + 2).w_inverse_strict(price),
                           table.at(t + 2).w_inverse(price)) <=
              spacing + 1e-9);
      } else {
        CHECK(std::abs(row.delta - next.delta) <= spacing + 1e-9);
      }
      if (period == Period::Off1) {
        const double price = cfg.tariff.pi_off_plus;
        const double hi2 = table.at(t + 2).w_inverse(price);
        if (hi2 + cfg.v_max <= grid.back() - spacing) {
          CHECK(interval_gap(table.at(t + 1).w_inverse_strict(price),
                             table.at(t + 1).w_inverse(price),
                             table.at(t + 2).w_inverse_strict(price) +
                                 cfg.v_max,
                             hi2 + cfg.v_max) <= spacing + 1e-9);
        }
      } else {
        CHECK(std::abs(row.tau - (next.tau + cfg.v_max)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("csv exports are well formed") {
  HouseholdConfig cfg = tiny_two_interval_config();
  const ValueTable table = induct_tiny(cfg, {0.8, 0.3});
  const ThresholdTable thresholds = compute_thresholds(cfg, table);
  export_value_table(table, "vbar_test.csv");
  export_threshold_table(thresholds, "thresholds_test.csv");
  std::ifstream v("vbar_test.csv"), t("thresholds_test.csv");
  std::string line;
  REQUIRE(std::getline(v, line));
  CHECK(line == "t,y,value,slope");
  REQUIRE(std::getline(t, line));
  CHECK(line == "t,tau,delta,sigma_plus,sigma_minus");
  int rows = 0;
  while (std::getline(t, line)) ++rows;
  CHECK(rows == 2);
}

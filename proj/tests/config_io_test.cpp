#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "nemco/config_io.hpp"
#include "nemco/model.hpp"

using namespace nemco;

namespace {

const char* kHousehold = R"json({
  "horizon": {"T": 16, "on_start": 8, "on_end": 13},
  "tariff": {"off_plus": 0.40, "off_minus": 0.10, "on_plus": 0.55,
             "on_minus": 0.25, "fixed": 0.0},
  "storage": {"capacity": 13.5, "charge_max": 3.2, "discharge_max": 3.2,
              "eta_c": 0.95, "eta_d": 0.95, "initial_soc": 6.75},
  "ev": {"charger_max": 3.6, "efficiency": 1.0, "demand": 9.0},
  "devices": [{"a": 0.9, "b": 0.35, "d_max": 4.0}],
  "penalty": {"alpha": 1.0},
  "salvage": {"beta": 0.30}
})json";

const char* kScenario = R"json({
  "day_hour_at_t0": 8,
  "connection": {"offset_min": -1, "offset_max": 1},
  "solar": {
    "family": "lognormal",
    "scale": 1.0,
    "sigma": 0.45,
    "hour_mean": [0,0,0,0,0,0.05,0.2,0.5,0.9,1.3,1.6,1.8,1.8,1.6,1.3,0.9,
                  0.5,0.2,0.05,0,0,0,0,0]
  },
  "demand": {"family": "truncated_normal", "mean": 9.0, "sd": 3.0,
             "lo": 0.0, "hi": 18.0}
})json";

}  // namespace

TEST_CASE("household config parses and validates") {
  const HouseholdConfig cfg = parse_household_config(kHousehold, "inline");
  CHECK(cfg.capacity_B == doctest::Approx(13.5));
  CHECK(cfg.tariff.horizon_T == 16);
  CHECK(cfg.tariff.on.begin == 8);
  CHECK(cfg.tariff.pi_on_plus == doctest::Approx(0.55));
  CHECK(cfg.devices.size() == 1);
  CHECK(cfg.y0 == doctest::Approx(9.0));
  CHECK(validate_config(cfg).ok());
}

TEST_CASE("ev efficiency is normalized on ingestion") {
  std::string text = kHousehold;
  const auto pos = text.find("\"efficiency\": 1.0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 17, "\"efficiency\": 0.9");
  const HouseholdConfig cfg = parse_household_config(text, "inline");
  CHECK(cfg.eta_ev == doctest::Approx(1.0));
  CHECK(cfg.y0 == doctest::Approx(10.0));
  CHECK(cfg.alpha == doctest::Approx(0.9));
}

TEST_CASE("schema errors name the JSON path") {
  std::string text = kHousehold;
  const auto pos = text.find("\"eta_c\": 0.95,");
  REQUIRE(pos != std::string::npos);
  text.erase(pos, 14);
  try {
    parse_household_config(text, "inline");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("storage.eta_c") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_household_config("{not json", "inline"), ConfigError);
  CHECK_THROWS_AS(load_household_config("/nonexistent/path.json"),
                  ConfigError);
}

TEST_CASE("scenario parses with a midday solar peak") {
  const ScenarioModel model = parse_scenario(kScenario, "inline");
  CHECK(model.offset_min == -1);
  CHECK(model.offset_max == 1);
  CHECK(model.solar_by_hour[0].family == DistributionSpec::Family::PointMass);
  CHECK(model.solar_by_hour[12].family == DistributionSpec::Family::LogNormal);
  // Location parametrized so the hourly mean matches the profile entry.
  QuadratureSpec quad;
  quad.nodes = 20000;
  const double mean =
      quadrature_mean(make_quadrature(model.solar_by_hour[12], quad));
  CHECK(mean == doctest::Approx(1.8).epsilon(2e-3));
  CHECK(model.demand.upper_bound() == doctest::Approx(18.0));
}

TEST_CASE("histogram demand loads from a sidecar file") {
  {
    std::ofstream hist("demand_hist.csv");
    hist << "# lo,hi,weight\n0,4,1\n4,8,2\n8,12,1\n";
  }
  const std::string scenario = R"json({
    "day_hour_at_t0": 8,
    "connection": {"offset_min": 0, "offset_max": 0},
    "solar": {"family": "lognormal", "sigma": 0.4,
              "hour_mean": [0,0,0,0,0,0,0,0,1,1,1,1,1,1,1,1,0,0,0,0,0,0,0,0]},
    "demand": {"family": "histogram", "file": "demand_hist.csv"}
  })json";
  const ScenarioModel model = parse_scenario(scenario, "inline", ".");
  CHECK(model.demand.family == DistributionSpec::Family::Histogram);
  CHECK(model.demand.quantile(0.5) == doctest::Approx(6.0));
  CHECK(model.demand.upper_bound() == doctest::Approx(12.0));
  std::remove("demand_hist.csv");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nemco/model.hpp"
#include "nemco/oracle.hpp"
#include "nemco/simulator.hpp"
#include "test_support.hpp"

using namespace nemco;
using namespace nemco::testing;

namespace {

ScenarioModel deterministic_model(double r_value, double demand) {
  ScenarioModel model;
  for (auto& d : model.solar_by_hour) d = DistributionSpec::point(r_value);
  model.demand = DistributionSpec::point(demand);
  model.day_hour_at_t0 = 8;
  return model;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

}  // namespace

TEST_CASE("policy names round-trip") {
  for (PolicyKind kind : {PolicyKind::Oracle, PolicyKind::MyopicOptimal,
                          PolicyKind::Cco, PolicyKind::Nco, PolicyKind::Pr,
                          PolicyKind::Mpc}) {
    CHECK(policy_from_string(to_string(kind)) == kind);
  }
  CHECK_FALSE(policy_from_string("nonsense").has_value());
}

TEST_CASE("zero-everything episode collects only consumption surplus") {
  HouseholdConfig cfg = storage_free(tiny_two_interval_config());
  const ScenarioModel model = deterministic_model(0.0, 0.0);
  const TableCache cache(cfg, model);
  const Realization real = sample_scenario(model, cfg, 1, 0);
  const EpisodeTrace trace =
      run_episode(PolicyKind::MyopicOptimal, real, cache.at(0));

  // Static consumption at the import price, twice, no terminal value.
  const double d_star =
      marginal_consumption(cfg.tariff.pi_off_plus, cfg.devices[0]);
  const double per_interval =
      cfg.devices[0].utility(d_star) -
      nem_payment(d_star, cfg.tariff.pi_off_plus, cfg.tariff.pi_off_minus, 0.0);
  CHECK(trace.total_surplus == doctest::Approx(2.0 * per_interval).epsilon(1e-9));
  CHECK(trace.terminal_reward == doctest::Approx(0.0));
}

TEST_CASE("oracle episode equals the deterministic solve") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.8, cfg.y0);
  const TableCache cache(cfg, model);
  Realization real;
  real.r = {0.8, 0.8};
  real.y0 = cfg.y0;
  real.offset = 0;
  const EpisodeTrace trace = run_episode(PolicyKind::Oracle, real, cache.at(0));

  DeterministicProblem problem;
  problem.config = cfg;
  problem.realization = real.r;
  CHECK(trace.total_surplus ==
        doctest::Approx(solve_deterministic(problem).objective).epsilon(1e-7));
}

TEST_CASE("myopic episode matches the brute-force value on the tiny config") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.8, cfg.y0);
  const TableCache cache(cfg, model);
  Realization real;
  real.r = {0.8, 0.3};
  real.y0 = cfg.y0;
  real.offset = 0;
  const EpisodeTrace trace =
      run_episode(PolicyKind::MyopicOptimal, real, cache.at(0));

  const BruteForceResult dp = brute_force_dp(cfg, point_nodes({0.8, 0.3}));
  CHECK(trace.total_surplus ==
        doctest::Approx(dp.value_at(0, cfg.s0, cfg.y0)).epsilon(2e-2));
  // Frozen rollout value (matches the hand computation).
  CHECK(trace.total_surplus == doctest::Approx(2.2355555556).epsilon(1e-9));
}

TEST_CASE("episode traces are dynamics-consistent") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.8, cfg.y0);
  const TableCache cache(cfg, model);
  const Realization real = sample_scenario(model, cfg, 9, 4);
  for (PolicyKind kind : {PolicyKind::MyopicOptimal, PolicyKind::Cco,
                          PolicyKind::Nco, PolicyKind::Pr, PolicyKind::Mpc,
                          PolicyKind::Oracle}) {
    const EpisodeTrace trace = run_episode(kind, real, cache.at(0));
    double acc = 0.0;
    for (const StepRecord& rec : trace.steps) {
      CHECK(rec.reward ==
            doctest::Approx(stage_reward(cache.at(0).config, rec.state,
                                         rec.action))
                .epsilon(1e-9));
      acc += rec.reward;
      if (kind == PolicyKind::MyopicOptimal) {
        // Storage only absorbs on-site renewable and only curtails imports.
        const double load = rec.action.v + rec.action.total_consumption();
        CHECK(rec.action.e * rec.z <= 1e-9);
        CHECK(rec.action.e * (load - rec.state.r) <= 1e-9);
        CHECK(rec.action.e <= rec.state.r + 1e-9);
      }
    }
    CHECK(trace.total_surplus ==
          doctest::Approx(acc + trace.terminal_reward).epsilon(1e-9));
  }
}

TEST_CASE("perfect-forecast MPC has zero gap on a deterministic scenario") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.8, cfg.y0);
  MonteCarloOptions opt;
  opt.n_runs = 1;
  opt.seed = 11;
  const auto results =
      monte_carlo(cfg, model, {PolicyKind::Oracle, PolicyKind::Mpc}, {1.0}, opt);
  REQUIRE(results.size() == 2);
  CHECK(results[0].gap_to_oracle == doctest::Approx(0.0));
  CHECK(std::abs(results[1].gap_to_oracle) <= 1e-7);
}

TEST_CASE("common random numbers give pathwise oracle dominance") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  ScenarioModel model = deterministic_model(0.8, cfg.y0);
  for (int h = 0; h < 24; ++h) {
    model.solar_by_hour[static_cast<size_t>(h)] =
        DistributionSpec::truncated_normal(0.8, 0.5, 0.0, 2.5);
  }
  model.demand = DistributionSpec::truncated_normal(1.0, 0.4, 0.0, 1.5);
  const TableCache cache(cfg, model);
  for (long episode = 0; episode < 25; ++episode) {
    const Realization real = sample_scenario(model, cfg, 123, episode);
    const AlignedTables& tables = cache.at(real.offset);
    const double oracle =
        run_episode(PolicyKind::Oracle, real, tables).total_surplus;
    for (PolicyKind kind : {PolicyKind::MyopicOptimal, PolicyKind::Cco,
                            PolicyKind::Nco, PolicyKind::Pr}) {
      CHECK(oracle >=
            run_episode(kind, real, tables).total_surplus - 1e-7);
    }
  }
}

TEST_CASE("monte carlo respects the per-policy run cap") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.8, cfg.y0);
  MonteCarloOptions opt;
  opt.n_runs = 6;
  opt.mpc_runs = 2;
  const auto results = monte_carlo(
      cfg, model, {PolicyKind::MyopicOptimal, PolicyKind::Mpc}, {1.0}, opt);
  CHECK(results[0].n_runs == 6);
  CHECK(results[1].n_runs == 2);
}

TEST_CASE("benchmark results are identical across thread counts") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  ScenarioModel model = deterministic_model(0.8, cfg.y0);
  for (int h = 0; h < 24; ++h) {
    model.solar_by_hour[static_cast<size_t>(h)] =
        DistributionSpec::truncated_normal(0.9, 0.4, 0.0, 2.0);
  }
  MonteCarloOptions one;
  one.n_runs = 40;
  one.threads = 1;
  MonteCarloOptions four = one;
  four.threads = 4;
  const std::vector<PolicyKind> policies = {PolicyKind::MyopicOptimal,
                                            PolicyKind::Pr};
  const auto a = monte_carlo(cfg, model, policies, {0.5, 1.0}, one);
  const auto b = monte_carlo(cfg, model, policies, {0.5, 1.0}, four);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean_surplus == b[i].mean_surplus);
    CHECK(a[i].std_err == b[i].std_err);
    CHECK(a[i].gap_to_oracle == b[i].gap_to_oracle);
  }

  export_results(a, "results_a.csv");
  export_results(b, "results_b.csv");
  CHECK(slurp("results_a.csv") == slurp("results_b.csv"));
}

TEST_CASE("export_results writes the documented schema") {
  export_results({}, "results_empty.csv");
  CHECK(slurp("results_empty.csv") ==
        "policy,renewable_scale,n_runs,mean_surplus,std_err,gap_to_oracle\n");

  BenchmarkResult row;
  row.policy = "mo";
  row.renewable_scale = 1.0;
  row.n_runs = 1;
  row.mean_surplus = 2.25;
  row.std_err = 0.0;
  row.gap_to_oracle = 0.01;
  export_results({row}, "results_one.csv");
  std::ifstream in("results_one.csv");
  std::string header, line;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, line));
  CHECK(line.substr(0, 3) == "mo,");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("five policies at three scales produce fifteen rows") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.6, cfg.y0);
  MonteCarloOptions opt;
  opt.n_runs = 2;
  const std::vector<PolicyKind> policies = {
      PolicyKind::MyopicOptimal, PolicyKind::Cco, PolicyKind::Nco,
      PolicyKind::Pr, PolicyKind::Oracle};
  const auto results = monte_carlo(cfg, model, policies, {0.5, 1.0, 1.5}, opt);
  CHECK(results.size() == 15);
  export_results(results, "results_grid.csv");
  std::ifstream in("results_grid.csv");
  std::string line;
  int rows = -1;  // discount the header
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 15);
}

TEST_CASE("trace export carries the zone labels") {
  const HouseholdConfig cfg = tiny_two_interval_config();
  const ScenarioModel model = deterministic_model(0.8, cfg.y0);
  const TableCache cache(cfg, model);
  const Realization real = sample_scenario(model, cfg, 5, 0);
  const EpisodeTrace trace =
      run_episode(PolicyKind::MyopicOptimal, real, cache.at(0));
  export_traces({{0, trace}}, "trace_test.csv");
  std::ifstream in("trace_test.csv");
  std::string header, line;
  REQUIRE(std::getline(in, header));
  CHECK(header == "episode,t,s,y,r,v,e,d_total,z,zone,reward");
  int rows = 0;
  bool labelled = false;
  while (std::getline(in, line)) {
    ++rows;
    labelled = labelled || line.find("net_") != std::string::npos;
  }
  CHECK(rows == 2);
  CHECK(labelled);
}

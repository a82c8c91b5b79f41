#include "nemco/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nemco/model.hpp"
#include "nemco/oracle.hpp"

namespace nemco {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::MyopicOptimal: return "mo";
    case PolicyKind::Cco: return "cco";
    case PolicyKind::Nco: return "nco";
    case PolicyKind::Pr: return "pr";
    case PolicyKind::Mpc: return "mpc";
  }
  return "unknown";
}

std::optional<PolicyKind> policy_from_string(const std::string& name) {
  if (name == "oracle") return PolicyKind::Oracle;
  if (name == "mo") return PolicyKind::MyopicOptimal;
  if (name == "cco") return PolicyKind::Cco;
  if (name == "nco") return PolicyKind::Nco;
  if (name == "pr") return PolicyKind::Pr;
  if (name == "mpc") return PolicyKind::Mpc;
  return std::nullopt;
}

TableCache::TableCache(const HouseholdConfig& base, const ScenarioModel& model,
                       double extra_scale, const QuadratureSpec& quadrature,
                       double grid_spacing) {
  model.validate(base);
  const int T = base.horizon();
  const double y_max = std::max(base.y0, model.demand.upper_bound());
  for (int offset = model.offset_min; offset <= model.offset_max; ++offset) {
    AlignedTables tables;
    tables.config = base;
    tables.config.tariff = shifted_tariff(base.tariff, offset);

    const std::vector<DistributionSpec> dists =
        interval_distributions(model, offset, T, extra_scale);
    std::vector<std::vector<QuadNode>> nodes;
    nodes.reserve(static_cast<size_t>(T));
    tables.forecast_means.reserve(static_cast<size_t>(T));
    for (const DistributionSpec& dist : dists) {
      nodes.push_back(make_quadrature(dist, quadrature));
      tables.forecast_means.push_back(quadrature_mean(nodes.back()));
    }

    const std::vector<double> grid =
        make_y_grid(tables.config, y_max, grid_spacing);
    tables.values = backward_induct(tables.config, nodes, grid);
    tables.thresholds = compute_thresholds(tables.config, tables.values);
    tables_.emplace(offset, std::move(tables));
  }
}

const AlignedTables& TableCache::at(int offset) const {
  const auto it = tables_.find(offset);
  if (it == tables_.end()) {
    throw std::out_of_range("TableCache: no tables for offset " +
                            std::to_string(offset));
  }
  return it->second;
}

namespace {

constexpr double kActionSlack = 1e-6;

Action project_feasible(const Action& raw, const State& state,
                        const HouseholdConfig& config, PolicyKind kind) {
  Action a = raw;
  const auto [e_dis, e_chg] = effective_storage_bounds(state.s, config);
  const double v_cap = std::min(state.y, config.v_max);
  const double v = std::clamp(a.v, 0.0, v_cap);
  const double e = std::clamp(a.e, -e_dis, e_chg);
  bool ok = std::abs(v - a.v) <= kActionSlack && std::abs(e - a.e) <= kActionSlack;
  for (size_t i = 0; ok && i < a.d.size(); ++i) {
    const double d =
        std::clamp(a.d[i], 0.0, config.devices[i].d_max);
    ok = std::abs(d - a.d[i]) <= kActionSlack;
    a.d[i] = d;
  }
  if (!ok || a.d.size() != config.devices.size()) {
    std::ostringstream oss;
    oss << "policy " << to_string(kind) << " produced an infeasible action at t="
        << state.t << " (v=" << raw.v << " e=" << raw.e << " s=" << state.s
        << " y=" << state.y << ")";
    throw std::runtime_error(oss.str());
  }
  a.v = v;
  a.e = e;
  return a;
}

}  // namespace

EpisodeTrace run_episode(PolicyKind policy, const Realization& realization,
                         const AlignedTables& tables) {
  const HouseholdConfig& config = tables.config;
  const int T = config.horizon();
  if (static_cast<int>(realization.r.size()) != T) {
    throw std::invalid_argument("run_episode: realization length mismatch");
  }

  // The full-information policy plans the whole horizon up front.
  std::vector<Action> oracle_plan;
  if (policy == PolicyKind::Oracle) {
    DeterministicProblem problem;
    problem.config = config;
    problem.config.y0 = realization.y0;
    problem.realization = realization.r;
    oracle_plan = solve_deterministic(problem).actions;
  }

  EpisodeTrace trace;
  trace.offset = realization.offset;
  trace.steps.reserve(static_cast<size_t>(T));

  State state;
  state.t = 0;
  state.s = config.s0;
  state.y = realization.y0;
  for (int t = 0; t < T; ++t) {
    state.r = realization.r[static_cast<size_t>(t)];
    state.price_plus = config.tariff.price_plus(t);
    state.price_minus = config.tariff.price_minus(t);

    StepRecord rec;
    switch (policy) {
      case PolicyKind::Oracle:
        rec.action = oracle_plan[static_cast<size_t>(t)];
        break;
      case PolicyKind::MyopicOptimal: {
        PolicyDecision dec = myopic_policy(state, tables.thresholds,
                                           tables.values.at(t + 1), config);
        rec.zone = dec.zone;
        rec.nu = dec.nu;
        rec.action = std::move(dec.action);
        break;
      }
      case PolicyKind::Cco:
        rec.action = cco_policy(state, tables.thresholds,
                                tables.values.at(t + 1), config);
        break;
      case PolicyKind::Nco:
        rec.action = nco_policy(state, tables.values.at(t + 1), config);
        break;
      case PolicyKind::Pr:
        rec.action = pr_policy(state, config);
        break;
      case PolicyKind::Mpc: {
        std::vector<double> forecast(tables.forecast_means.begin() + t,
                                     tables.forecast_means.end());
        forecast[0] = state.r;  // current renewable is observed
        rec.action = mpc_policy(state, forecast, config);
        break;
      }
    }

    rec.action = project_feasible(rec.action, state, config, policy);
    rec.state = state;
    rec.z = net_consumption(rec.action, state.r);
    rec.reward = stage_reward(config, state, rec.action);
    trace.total_surplus += rec.reward;

    state = step_dynamics(config, state, rec.action,
                          t + 1 < T ? realization.r[static_cast<size_t>(t) + 1]
                                    : 0.0);
    trace.steps.push_back(std::move(rec));
  }
  trace.terminal_reward =
      terminal_reward(state.s, state.y, config.alpha, config.beta);
  trace.total_surplus += trace.terminal_reward;
  return trace;
}

std::vector<BenchmarkResult> monte_carlo(const HouseholdConfig& base,
                                         const ScenarioModel& model,
                                         const std::vector<PolicyKind>& policies,
                                         const std::vector<double>& scales,
                                         const MonteCarloOptions& options,
                                         std::vector<std::string>* failures) {
  if (options.n_runs < 1) {
    throw std::invalid_argument("monte_carlo: n_runs must be >= 1");
  }
  const long n = options.n_runs;
  const long n_mpc = options.mpc_runs < 0 ? n : std::min(options.mpc_runs, n);
  const auto runs_for = [&](PolicyKind kind) {
    return kind == PolicyKind::Mpc ? n_mpc : n;
  };

  // The oracle is evaluated on every episode regardless of the requested
  // policy list; gaps are relative to it on the matching episode subset.
  std::vector<PolicyKind> evaluated = policies;
  if (std::find(evaluated.begin(), evaluated.end(), PolicyKind::Oracle) ==
      evaluated.end()) {
    evaluated.push_back(PolicyKind::Oracle);
  }

  std::vector<BenchmarkResult> results;
  for (double scale : scales) {
    const TableCache cache(base, model, scale, options.quadrature,
                           options.grid_spacing);

    std::vector<std::vector<double>> surplus(evaluated.size());
    std::vector<std::atomic<bool>> broken(evaluated.size());
    std::vector<std::string> errors(evaluated.size());
    for (size_t p = 0; p < evaluated.size(); ++p) {
      surplus[p].assign(static_cast<size_t>(runs_for(evaluated[p])), 0.0);
      broken[p].store(false);
    }

    std::atomic<long> cursor{0};
    std::mutex error_mutex;

    const auto worker = [&]() {
      for (;;) {
        const long episode = cursor.fetch_add(1);
        if (episode >= n) return;
        const Realization realization = sample_scenario(
            model, base, options.seed, static_cast<uint64_t>(episode), scale);
        const AlignedTables& tables = cache.at(realization.offset);
        for (size_t p = 0; p < evaluated.size(); ++p) {
          if (episode >= runs_for(evaluated[p]) || broken[p].load()) continue;
          try {
            const EpisodeTrace trace =
                run_episode(evaluated[p], realization, tables);
            surplus[p][static_cast<size_t>(episode)] = trace.total_surplus;
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!broken[p].load()) {
              errors[p] = to_string(evaluated[p]) + "@" +
                          std::to_string(scale) + ": episode " +
                          std::to_string(episode) + ": " + e.what();
              broken[p].store(true);
            }
          }
        }
      }
    };

    int n_threads = options.threads > 0
                        ? options.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = static_cast<int>(std::max<long>(1, std::min<long>(n_threads, n)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    const size_t oracle_slot =
        static_cast<size_t>(std::find(evaluated.begin(), evaluated.end(),
                                      PolicyKind::Oracle) -
                            evaluated.begin());
    if (broken[oracle_slot].load()) {
      throw std::runtime_error("monte_carlo: " + errors[oracle_slot]);
    }
    for (size_t p = 0; p < evaluated.size(); ++p) {
      if (!broken[p].load()) continue;
      if (!failures) throw std::runtime_error("monte_carlo: " + errors[p]);
      failures->push_back(errors[p]);
    }

    // Index-order reduction keeps results independent of scheduling.
    const auto mean_over = [](const std::vector<double>& xs, long count) {
      double m = 0.0;
      for (long i = 0; i < count; ++i) m += xs[static_cast<size_t>(i)];
      return m / static_cast<double>(count);
    };

    for (PolicyKind kind : policies) {
      const size_t slot = static_cast<size_t>(
          std::find(evaluated.begin(), evaluated.end(), kind) -
          evaluated.begin());
      if (broken[slot].load()) continue;  // reported above
      const long count = runs_for(kind);
      const double mean = mean_over(surplus[slot], count);
      double var = 0.0;
      for (long i = 0; i < count; ++i) {
        const double d = surplus[slot][static_cast<size_t>(i)] - mean;
        var += d * d;
      }
      var = count > 1 ? var / static_cast<double>(count - 1) : 0.0;
      const double oracle_mean = mean_over(surplus[oracle_slot], count);

      BenchmarkResult row;
      row.policy = to_string(kind);
      row.renewable_scale = scale;
      row.n_runs = count;
      row.mean_surplus = mean;
      row.std_err = std::sqrt(var / static_cast<double>(count));
      row.gap_to_oracle =
          kind == PolicyKind::Oracle
              ? 0.0
              : (oracle_mean - mean) / oracle_mean;
      row.seed = options.seed;
      results.push_back(std::move(row));
    }
  }
  return results;
}

void export_results(const std::vector<BenchmarkResult>& results,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "policy,renewable_scale,n_runs,mean_surplus,std_err,gap_to_oracle\n";
  char buf[256];
  for (const BenchmarkResult& row : results) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%ld,%.10g,%.10g,%.10g\n",
                  row.policy.c_str(), row.renewable_scale, row.n_runs,
                  row.mean_surplus, row.std_err, row.gap_to_oracle);
    out << buf;
  }
}

void export_traces(const std::vector<std::pair<long, EpisodeTrace>>& traces,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "episode,t,s,y,r,v,e,d_total,z,zone,reward\n";
  char buf[320];
  for (const auto& [episode, trace] : traces) {
    for (const StepRecord& rec : trace.steps) {
      std::snprintf(buf, sizeof(buf),
                    "%ld,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%s,%.10g\n",
                    episode, rec.state.t, rec.state.s, rec.state.y, rec.state.r,
                    rec.action.v, rec.action.e, rec.action.total_consumption(),
                    rec.z, rec.zone ? to_string(*rec.zone).c_str() : "-",
                    rec.reward);
      out << buf;
    }
  }
}

}  // namespace nemco

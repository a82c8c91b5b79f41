#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nemco/policy.hpp"
#include "nemco/scenario.hpp"
#include "nemco/types.hpp"
#include "nemco/value_backward.hpp"

namespace nemco {

enum class PolicyKind { Oracle, MyopicOptimal, Cco, Nco, Pr, Mpc };

std::string to_string(PolicyKind kind);
std::optional<PolicyKind> policy_from_string(const std::string& name);

struct StepRecord {
  State state;
  Action action;
  std::optional<Zone> zone;      // labelled policies only
  std::optional<double> nu;
  double z = 0.0;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  double terminal_reward = 0.0;
  double total_surplus = 0.0;  // stage rewards plus terminal, counted once
  int offset = 0;
};

/// Everything one tariff alignment needs to run any policy: the shifted
/// config, value and threshold tables, and per-interval forecast means.
struct AlignedTables {
  HouseholdConfig config;
  ValueTable values;
  ThresholdTable thresholds;
  std::vector<double> forecast_means;
};

/// Builds AlignedTables for every admissible connection offset of a scenario
/// at one renewable scale.
class TableCache {
 public:
  TableCache(const HouseholdConfig& base, const ScenarioModel& model,
             double extra_scale = 1.0, const QuadratureSpec& quadrature = {},
             double grid_spacing = 0.0);

  const AlignedTables& at(int offset) const;

 private:
  std::map<int, AlignedTables> tables_;
};

/// Rolls one episode forward under a policy, recording states, actions,
/// zones, and rewards. Infeasible policy output beyond a small projection
/// slack fails hard with the policy name and interval in the message.
EpisodeTrace run_episode(PolicyKind policy, const Realization& realization,
                         const AlignedTables& tables);

struct BenchmarkResult {
  std::string policy;
  double renewable_scale = 1.0;
  long n_runs = 0;
  double mean_surplus = 0.0;
  double std_err = 0.0;
  double gap_to_oracle = 0.0;
  uint64_t seed = 0;
};

struct MonteCarloOptions {
  long n_runs = 10'000;
  uint64_t seed = 42;
  long mpc_runs = -1;  // separate cap for MPC; -1 means n_runs
  int threads = 0;     // 0 picks the hardware concurrency
  QuadratureSpec quadrature;
  double grid_spacing = 0.0;
};

/// Common-random-number policy evaluation: every policy sees the same
/// realization per episode index, and the oracle is always evaluated so the
/// relative surplus gap (R_oracle - R_policy) / R_oracle is computed on the
/// matching episode subset. Episode workloads run on a thread pool; the
/// reduction happens in episode order, so results are bit-identical for any
/// thread count.
///
/// A failing policy is dropped from the results and reported through
/// `failures` ("policy@scale: episode N: what"), while the others keep
/// running. Without a collector any failure throws. Oracle failures always
/// throw, since no gap can be reported without it.
std::vector<BenchmarkResult> monte_carlo(const HouseholdConfig& base,
                                         const ScenarioModel& model,
                                         const std::vector<PolicyKind>& policies,
                                         const std::vector<double>& scales,
                                         const MonteCarloOptions& options = {},
                                         std::vector<std::string>* failures = nullptr);

/// CSV with header policy,renewable_scale,n_runs,mean_surplus,std_err,
/// gap_to_oracle; rows ordered scale-major in the order given to
/// monte_carlo. Byte-identical for identical inputs.
void export_results(const std::vector<BenchmarkResult>& results,
                    const std::string& path);

/// CSV with header episode,t,s,y,r,v,e,d_total,z,zone,reward.
void export_traces(const std::vector<std::pair<long, EpisodeTrace>>& traces,
                   const std::string& path);

}  // namespace nemco

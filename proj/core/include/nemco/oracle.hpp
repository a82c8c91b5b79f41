#pragma once

#include <vector>

#include "nemco/distribution.hpp"
#include "nemco/types.hpp"

namespace nemco {

/// Full-information deterministic instance: the realized renewable
/// trajectory for intervals start_t .. T-1, with config.s0 / config.y0 the
/// state entering start_t. Prices come from config.tariff at the absolute
/// interval index.
struct DeterministicProblem {
  HouseholdConfig config;
  std::vector<double> realization;
  int start_t = 0;
};

/// A feasible trajectory with its accumulated surplus (terminal reward
/// included exactly once) and a stationarity certificate.
struct TrajectorySolution {
  std::vector<Action> actions;     // one per interval start_t .. T-1
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;

  // Recovered multipliers, kept so the stationarity check is replayable.
  std::vector<double> nu;          // net-consumption balance prices, per t
};

/// Options for the trajectory solver.
struct SolveOptions {
  int max_iterations = 60;
  double kkt_tolerance = 1e-5;
};

/// Maximizes sum_t [U(d_t) - P(z_t)] + beta*s_T - alpha*y_T over feasible
/// trajectories by interior point on the charge/discharge-split quadratic
/// program. Simultaneous charge and discharge is excluded at any optimum
/// (eta_c*eta_d < 1 makes it strictly wasteful under the price chain) and
/// asserted post hoc. Throws std::runtime_error on non-convergence, with the
/// residuals in the message.
TrajectorySolution solve_deterministic(const DeterministicProblem& problem,
                                       const SolveOptions& options = {});

/// Max KKT violation of a trajectory for the deterministic problem. Uses the
/// solution's stored multipliers when present, otherwise recovers
/// least-squares multipliers from the active set.
double kkt_residual(const DeterministicProblem& problem,
                    const TrajectorySolution& solution);

/// Recomputes the accumulated surplus of a trajectory from first principles
/// (dynamics rolled forward, terminal reward once).
double trajectory_objective(const DeterministicProblem& problem,
                            const std::vector<Action>& actions);

/// Discretized dynamic program over (SoC, remaining demand) used as the
/// ground-truth test oracle on tiny instances.
struct BruteForceOptions {
  double resolution = 1e-2;          // state and action grid step (kWh)
  double consumption_resolution = 0; // d grid step; defaults to resolution/10
  long cell_budget = 2'000'000'000;  // max action evaluations per stage
};

struct BruteForceResult {
  std::vector<double> s_grid;
  std::vector<double> y_grid;
  // value[t][si * y_grid.size() + yi] = expected optimal value-to-go at the
  // start of interval t; value[T] is the terminal reward surface.
  std::vector<std::vector<double>> value;

  double value_at(int t, double s, double y) const;  // bilinear interpolation
};

/// Exhaustive DP: actions enumerated at the grid resolution, consumption
/// best-responses tabulated per net position, next SoC interpolated
/// linearly. Supports stochastic renewables through per-interval enumerated
/// nodes (renewable_nodes[t]); a single node per interval makes the instance
/// deterministic. Restricted to T <= 4, a single device, and instances whose
/// state/action table fits the cell budget; anything larger is refused with
/// std::invalid_argument.
BruteForceResult brute_force_dp(
    const HouseholdConfig& config,
    const std::vector<std::vector<QuadNode>>& renewable_nodes,
    const BruteForceOptions& options = {});

/// One-step greedy action with respect to a brute-force table: re-optimizes
/// interval t at (s, y, r) against value[t+1] on the same action grid.
Action brute_force_greedy_action(const HouseholdConfig& config,
                                 const BruteForceResult& table, int t,
                                 double s, double y, double r,
                                 const BruteForceOptions& options = {});

}  // namespace nemco

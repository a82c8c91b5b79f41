#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nemco/types.hpp"

namespace nemco {

/// Checks every TariffSchedule and HouseholdConfig invariant. Returns an
/// empty report iff the config is usable by the policy machinery.
ValidationReport validate_config(const HouseholdConfig& config);

/// Rescales the EV demand coordinate so the charging efficiency becomes 1
/// (y0 divided by eta_ev, alpha multiplied by it). All policy and solver
/// math assumes the normalized form; config ingestion applies this
/// automatically. No-op when eta_ev == 1.
HouseholdConfig normalize_ev_efficiency(HouseholdConfig config);

/// Net consumption z = v + sum(d) + e - r as seen by the revenue meter.
double net_consumption(const Action& action, double r);

/// Net-metering payment: z billed at pi_plus when importing, credited at
/// pi_minus when exporting, plus the fixed per-interval charge.
double nem_payment(double z, double pi_plus, double pi_minus, double pi_zero);

/// Total utility of a consumption vector over the configured devices.
double consumption_utility(std::span<const DeviceUtility> devices,
                           std::span<const double> d);

/// Household surplus for one interval: U(d) minus the net-metering payment.
double stage_reward(const HouseholdConfig& config, const State& state,
                    const Action& action);

/// Terminal reward beta*s_T - alpha*y_T, counted exactly once per episode.
double terminal_reward(double s_T, double y_T, double alpha, double beta);

/// Advances SoC and remaining demand under an action and sets the next
/// interval's realized renewable and prices. Throws std::domain_error if the
/// action drives s outside [0, B] or y below 0 beyond kFeasTol; violations
/// within tolerance are clamped.
State step_dynamics(const HouseholdConfig& config, const State& state,
                    const Action& action, double r_next);

/// SoC-clipped storage bounds at state-of-charge s: first element is the
/// usable discharge magnitude min{e_dis_max, s*eta_d}, second the usable
/// charge min{e_chg_max, (B-s)/eta_c}.
std::pair<double, double> effective_storage_bounds(
    double s, const HouseholdConfig& config);

/// Surplus-maximizing consumption of one device at marginal price pi:
/// clamp((a - pi)/b, 0, d_max). Non-increasing in pi.
double marginal_consumption(double pi, const DeviceUtility& device);

/// Aggregate surplus-maximizing consumption over all devices.
double aggregate_consumption(double pi, std::span<const DeviceUtility> devices);

/// Per-device surplus-maximizing consumption at marginal price pi.
std::vector<double> consumption_profile(double pi,
                                        std::span<const DeviceUtility> devices);

}  // namespace nemco

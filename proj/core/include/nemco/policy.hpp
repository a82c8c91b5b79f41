#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nemco/concave_pl.hpp"
#include "nemco/types.hpp"
#include "nemco/value_backward.hpp"

namespace nemco {

/// Dispatch zone of a decision. The renewable axis splits into a
/// net-consuming zone, five net-zero cases, and a net-producing zone:
///
///   NetZero1  storage at max discharge, nu in [beta/eta_d, pi+]
///   NetZero2  EV clipped at sigma_plus, nu = beta/eta_d, storage discharges
///   NetZero3  storage idle, nu in [beta*eta_c, beta/eta_d]
///   NetZero4  EV clipped at sigma_minus, nu = beta*eta_c, storage charges
///   NetZero5  storage at max charge, nu in [pi-, beta*eta_c]
///
/// Storage-free decisions never leave cases 1/3/5 (the storage caps are
/// zero, so cases 2 and 4 have empty renewable ranges).
enum class Zone {
  NetConsuming,
  NetZero1,
  NetZero2,
  NetZero3,
  NetZero4,
  NetZero5,
  NetProducing,
};

std::string to_string(Zone zone);

struct PolicyDecision {
  Action action;
  Zone zone = Zone::NetConsuming;
  std::optional<double> nu;  // marginal price in net-zero zones
};

/// EV charge clip h_theta(y) = min{v_cap, max{y - theta, 0}}: charge the
/// demand above threshold theta, up to the charger cap. Non-decreasing in y,
/// non-increasing in theta.
double ev_clip(double y, double theta, double v_cap);

struct NuSolution {
  double nu = 0.0;
  double v = 0.0;
  std::vector<double> d;
};

/// Solves for the net-zero marginal price: finds nu in [nu_lo, nu_hi] such
/// that h_{w(nu)}(y) + l(nu) equals `target`, then reconstructs the split so
/// v + sum(d) == target exactly (v absorbs the flat stretches of the value
/// function where the price alone does not pin it down). Total load is
/// non-increasing in nu. Throws std::runtime_error when target lies outside
/// [load(nu_hi), load(nu_lo)] beyond a small slack, which signals an
/// inconsistency between thresholds and the value table.
NuSolution solve_nu(double target, double y, double nu_lo, double nu_hi,
                    std::span<const DeviceUtility> devices,
                    const ConcavePLFunction& vbar_next, double v_cap);

/// Storage-free optimal decision (storage forced idle): charge the EV above
/// tau when importing, above delta when exporting, and split the renewable
/// between EV and devices at a common marginal price in between.
PolicyDecision procrastination_policy(const State& state,
                                      const ThresholdTable& thresholds,
                                      const ConcavePLFunction& vbar_next,
                                      const HouseholdConfig& config);

/// Optimal decision when storage is valued at its salvage rate
/// (beta*eta_c charging, beta/eta_d discharging). Case ladder over the eight
/// renewable-axis boundaries; interval seams are right-open.
PolicyDecision myopic_policy(const State& state,
                             const ThresholdTable& thresholds,
                             const ConcavePLFunction& vbar_next,
                             const HouseholdConfig& config);

/// Payment-reduction baseline. Deterministic greedy rule:
///   1. EV charges the deadline-forced minimum max{y - (T-t-1)*v_max, 0},
///      plus any free renewable up to min{y, v_max}.
///   2. Devices maximize current surplus at the resulting marginal price.
///   3. Storage absorbs the remaining surplus/deficit within its SoC-clipped
///      bounds.
Action pr_policy(const State& state, const HouseholdConfig& config);

/// Non-co-optimized baseline: the one-step problem is solved three times in
/// the order EV, consumption, storage, each time over a single device class
/// with the previously scheduled values held fixed.
Action nco_policy(const State& state, const ConcavePLFunction& vbar_next,
                  const HouseholdConfig& config);

/// Charging-consumption co-optimized baseline: (v, d) from the storage-free
/// policy, storage then takes the residual renewable within bounds (always
/// salvage-improving under the validated price chain).
Action cco_policy(const State& state, const ThresholdTable& thresholds,
                  const ConcavePLFunction& vbar_next,
                  const HouseholdConfig& config);

/// Certainty-equivalent MPC: solves the deterministic problem over the
/// remaining horizon with forecast[0] the realized current renewable and
/// forecast[k] the predicted means, then applies the first interval's
/// action. Propagates solver failure.
Action mpc_policy(const State& state, std::span<const double> forecast,
                  const HouseholdConfig& config);

}  // namespace nemco

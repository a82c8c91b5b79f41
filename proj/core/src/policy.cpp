#include "nemco/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nemco/model.hpp"
#include "nemco/oracle.hpp"

namespace nemco {

namespace {

constexpr double kBracketSlack = 1e-7;

double sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

/// Surplus-maximizing consumption against a fixed net target: maximize
/// U(d) - P(sum d - target). Returns the profile and the marginal price.
std::vector<double> static_consumption(double target,
                                       std::span<const DeviceUtility> devices,
                                       double pi_plus, double pi_minus,
                                       double* nu_out = nullptr) {
  const double at_plus = aggregate_consumption(pi_plus, devices);
  if (at_plus >= target) {
    if (nu_out) *nu_out = pi_plus;
    return consumption_profile(pi_plus, devices);
  }
  const double at_minus = aggregate_consumption(pi_minus, devices);
  if (at_minus <= target) {
    if (nu_out) *nu_out = pi_minus;
    return consumption_profile(pi_minus, devices);
  }
  double a = pi_minus, b = pi_plus;  // aggregate is non-increasing in price
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if (aggregate_consumption(m, devices) >= target) {
      a = m;
    } else {
      b = m;
    }
  }
  if (nu_out) *nu_out = a;
  return consumption_profile(a, devices);
}

}  // namespace

std::string to_string(Zone zone) {
  switch (zone) {
    case Zone::NetConsuming: return "net_consuming";
    case Zone::NetZero1: return "net_zero_1";
    case Zone::NetZero2: return "net_zero_2";
    case Zone::NetZero3: return "net_zero_3";
    case Zone::NetZero4: return "net_zero_4";
    case Zone::NetZero5: return "net_zero_5";
    case Zone::NetProducing: return "net_producing";
  }
  return "unknown";
}

double ev_clip(double y, double theta, double v_cap) {
  return std::min(v_cap, std::max(y - theta, 0.0));
}

NuSolution solve_nu(double target, double y, double nu_lo, double nu_hi,
                    std::span<const DeviceUtility> devices,
                    const ConcavePLFunction& vbar_next, double v_cap) {
  if (!(nu_lo <= nu_hi)) {
    throw std::invalid_argument("solve_nu: empty price bracket");
  }
  // At price nu the EV charge may sit anywhere inside the flat stretch of
  // the value function whose slope ties with -nu; [v_floor, v_ceil] is that
  // admissible interval (a single point when no tie exists).
  const auto v_floor = [&](double nu) {
    return ev_clip(y, vbar_next.w_inverse(nu), v_cap);
  };
  const auto v_ceil = [&](double nu) {
    return ev_clip(y, vbar_next.w_inverse_strict(nu), v_cap);
  };
  const auto load_min = [&](double nu) {
    return v_floor(nu) + aggregate_consumption(nu, devices);
  };
  const auto load_max = [&](double nu) {
    return v_ceil(nu) + aggregate_consumption(nu, devices);
  };

  if (target > load_max(nu_lo) + kBracketSlack ||
      target < load_min(nu_hi) - kBracketSlack) {
    std::ostringstream oss;
    oss << "solve_nu: target " << target << " outside bracket loads ["
        << load_min(nu_hi) << ", " << load_max(nu_lo) << "] for nu in ["
        << nu_lo << ", " << nu_hi << "]";
    throw std::runtime_error(oss.str());
  }

  double nu;
  if (target >= load_min(nu_lo)) {
    nu = nu_lo;
  } else if (target <= load_max(nu_hi)) {
    nu = nu_hi;
  } else {
    // The intervals [load_min, load_max] tile the load axis as nu falls, so
    // bisection keeps load_min(a) > target > load_max(b).
    double a = nu_lo, b = nu_hi;
    nu = b;
    for (int it = 0; it < 120; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) {
        nu = b;
        break;
      }
      if (load_min(m) <= target && target <= load_max(m)) {
        nu = m;
        break;
      }
      if (load_min(m) > target) {
        a = m;
      } else {
        b = m;
      }
      nu = b;
    }
  }

  NuSolution out;
  out.nu = nu;
  out.d = consumption_profile(nu, devices);
  out.v = std::clamp(target - sum(out.d), v_floor(nu), v_ceil(nu));
  out.v = std::clamp(out.v, 0.0, std::min(v_cap, y));
  if (std::abs(out.v + sum(out.d) - target) > 1e-7) {
    std::ostringstream oss;
    oss << "solve_nu: allocation missed the target by "
        << out.v + sum(out.d) - target;
    throw std::runtime_error(oss.str());
  }
  return out;
}

PolicyDecision procrastination_policy(const State& state,
                                      const ThresholdTable& thresholds,
                                      const ConcavePLFunction& vbar_next,
                                      const HouseholdConfig& config) {
  const ThresholdRow& row = thresholds.at(state.t);
  const auto& devices = config.devices;
  const double pip = state.price_plus;
  const double pim = state.price_minus;

  PolicyDecision out;
  const double dplus =
      aggregate_consumption(pip, devices) + ev_clip(state.y, row.tau, config.v_max);
  const double dminus =
      aggregate_consumption(pim, devices) + ev_clip(state.y, row.delta, config.v_max);

  if (state.r < dplus) {
    out.zone = Zone::NetConsuming;
    out.action.v = ev_clip(state.y, row.tau, config.v_max);
    out.action.d = consumption_profile(pip, devices);
  } else if (state.r > dminus) {
    out.zone = Zone::NetProducing;
    out.action.v = ev_clip(state.y, row.delta, config.v_max);
    out.action.d = consumption_profile(pim, devices);
  } else {
    NuSolution alloc =
        solve_nu(state.r, state.y, pim, pip, devices, vbar_next, config.v_max);
    // Storage is idle, so the net-zero zone splits by the marginal price the
    // same way the storage cases do.
    if (alloc.nu > config.beta / config.eta_d) {
      out.zone = Zone::NetZero1;
    } else if (alloc.nu >= config.beta * config.eta_c) {
      out.zone = Zone::NetZero3;
    } else {
      out.zone = Zone::NetZero5;
    }
    out.nu = alloc.nu;
    out.action.v = alloc.v;
    out.action.d = std::move(alloc.d);
  }
  out.action.e = 0.0;
  return out;
}

PolicyDecision myopic_policy(const State& state,
                             const ThresholdTable& thresholds,
                             const ConcavePLFunction& vbar_next,
                             const HouseholdConfig& config) {
  const ThresholdRow& row = thresholds.at(state.t);
  const auto& devices = config.devices;
  const auto [e_dis, e_chg] = effective_storage_bounds(state.s, config);
  const DeltaBounds bounds =
      delta_boundaries(state.t, state.y, state.s, config, thresholds);
  const double charge_value = config.beta * config.eta_c;
  const double discharge_cost = config.beta / config.eta_d;
  const double pip = state.price_plus;
  const double pim = state.price_minus;
  const double r = state.r;
  const double y = state.y;

  PolicyDecision out;
  if (r < bounds.dplus_prime) {
    out.zone = Zone::NetConsuming;
    out.action.v = ev_clip(y, row.tau, config.v_max);
    out.action.d = consumption_profile(pip, devices);
    out.action.e = -e_dis;
  } else if (r < bounds.d1) {
    // Storage at max discharge; price clears the augmented renewable.
    NuSolution alloc = solve_nu(r + e_dis, y, discharge_cost, pip, devices,
                                vbar_next, config.v_max);
    out.zone = Zone::NetZero1;
    out.nu = alloc.nu;
    out.action.v = alloc.v;
    out.action.d = std::move(alloc.d);
    out.action.e = -e_dis;
  } else if (r < bounds.d2) {
    // Price pinned at the discharge value; storage covers the gap.
    out.zone = Zone::NetZero2;
    out.nu = discharge_cost;
    out.action.v = ev_clip(y, row.sigma_plus, config.v_max);
    out.action.d = consumption_profile(discharge_cost, devices);
    out.action.e = std::clamp(
        r - out.action.v - sum(out.action.d), -e_dis, 0.0);
  } else if (r < bounds.d3) {
    // Storage idle; renewable fully consumed on site.
    NuSolution alloc = solve_nu(r, y, charge_value, discharge_cost, devices,
                                vbar_next, config.v_max);
    out.zone = Zone::NetZero3;
    out.nu = alloc.nu;
    out.action.v = alloc.v;
    out.action.d = std::move(alloc.d);
    out.action.e = 0.0;
  } else if (r < bounds.d4) {
    // Price pinned at the charge value; storage takes the excess.
    out.zone = Zone::NetZero4;
    out.nu = charge_value;
    out.action.v = ev_clip(y, row.sigma_minus, config.v_max);
    out.action.d = consumption_profile(charge_value, devices);
    out.action.e = std::clamp(
        r - out.action.v - sum(out.action.d), 0.0, e_chg);
  } else if (r < bounds.dminus_prime) {
    // Storage at max charge; price clears what is left.
    NuSolution alloc = solve_nu(r - e_chg, y, pim, charge_value, devices,
                                vbar_next, config.v_max);
    out.zone = Zone::NetZero5;
    out.nu = alloc.nu;
    out.action.v = alloc.v;
    out.action.d = std::move(alloc.d);
    out.action.e = e_chg;
  } else {
    out.zone = Zone::NetProducing;
    out.action.v = ev_clip(y, row.delta, config.v_max);
    out.action.d = consumption_profile(pim, devices);
    out.action.e = e_chg;
  }
  return out;
}

Action pr_policy(const State& state, const HouseholdConfig& config) {
  const int remaining = config.horizon() - state.t - 1;
  const double cap = std::min(state.y, config.v_max);
  const double forced =
      std::clamp(state.y - remaining * config.v_max, 0.0, cap);
  const double greedy = std::min(state.r, cap);

  Action action;
  action.v = std::max(forced, greedy);
  action.d = static_consumption(state.r - action.v, config.devices,
                                state.price_plus, state.price_minus);
  const auto [e_dis, e_chg] = effective_storage_bounds(state.s, config);
  const double residual = state.r - action.v - action.total_consumption();
  action.e = std::clamp(residual, -e_dis, e_chg);
  return action;
}

Action nco_policy(const State& state, const ConcavePLFunction& vbar_next,
                  const HouseholdConfig& config) {
  // Pass 1: EV alone against the renewable, everything else at zero.
  const double cap = std::min(state.y, config.v_max);
  const double v_import =
      ev_clip(state.y, vbar_next.w_inverse(state.price_plus), config.v_max);
  const double v_export =
      ev_clip(state.y, vbar_next.w_inverse(state.price_minus), config.v_max);
  Action action;
  if (v_import > state.r) {
    action.v = v_import;
  } else if (v_export < state.r) {
    action.v = v_export;
  } else {
    action.v = std::min(state.r, cap);
  }

  // Pass 2: consumption against what the EV left.
  action.d = static_consumption(state.r - action.v, config.devices,
                                state.price_plus, state.price_minus);

  // Pass 3: storage absorbs the residual (always salvage-improving under the
  // validated price chain).
  const auto [e_dis, e_chg] = effective_storage_bounds(state.s, config);
  const double residual = state.r - action.v - action.total_consumption();
  action.e = std::clamp(residual, -e_dis, e_chg);
  return action;
}

Action cco_policy(const State& state, const ThresholdTable& thresholds,
                  const ConcavePLFunction& vbar_next,
                  const HouseholdConfig& config) {
  PolicyDecision base =
      procrastination_policy(state, thresholds, vbar_next, config);
  Action action = std::move(base.action);
  const auto [e_dis, e_chg] = effective_storage_bounds(state.s, config);
  const double residual = state.r - action.v - action.total_consumption();
  action.e = std::clamp(residual, -e_dis, e_chg);
  return action;
}

Action mpc_policy(const State& state, std::span<const double> forecast,
                  const HouseholdConfig& config) {
  const int remaining = config.horizon() - state.t;
  if (static_cast<int>(forecast.size()) != remaining) {
    throw std::invalid_argument(
        "mpc_policy: forecast must cover the remaining horizon");
  }
  DeterministicProblem problem;
  problem.config = config;
  problem.config.s0 = state.s;
  problem.config.y0 = state.y;
  problem.start_t = state.t;
  problem.realization.assign(forecast.begin(), forecast.end());

  TrajectorySolution sol = solve_deterministic(problem);
  return sol.actions.front();
}

}  // namespace nemco

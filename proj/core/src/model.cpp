#include "nemco/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nemco {

namespace {

bool finite(double x) { return std::isfinite(x); }

void add(ValidationReport& report, std::string name, std::string detail) {
  report.violations.push_back({std::move(name), std::move(detail)});
}

}  // namespace

ValidationReport validate_config(const HouseholdConfig& config) {
  ValidationReport report;
  const TariffSchedule& tf = config.tariff;

  if (tf.horizon_T < 1) {
    add(report, "horizon", "horizon_T must be >= 1");
  }

  // off1, on, off2 must partition [0, T) in that order; off blocks may be
  // empty.
  const bool ranges_ordered = tf.off1.begin == 0 &&
                              tf.off1.end == tf.on.begin &&
                              tf.on.end == tf.off2.begin &&
                              tf.off2.end == tf.horizon_T &&
                              tf.off1.size() >= 0 && tf.on.size() >= 0 &&
                              tf.off2.size() >= 0;
  if (!ranges_ordered) {
    std::ostringstream oss;
    oss << "off1=[" << tf.off1.begin << "," << tf.off1.end << ") on=["
        << tf.on.begin << "," << tf.on.end << ") off2=[" << tf.off2.begin
        << "," << tf.off2.end << ") does not partition [0," << tf.horizon_T
        << ")";
    add(report, "tariff_partition", oss.str());
  }

  if (!(tf.pi_off_minus < tf.pi_on_minus && tf.pi_on_minus < tf.pi_off_plus &&
        tf.pi_off_plus < tf.pi_on_plus)) {
    add(report, "arbitrage_free_ordering",
        "tariff prices must satisfy pi_off- < pi_on- < pi_off+ < pi_on+");
  }

  if (!(config.eta_c > 0.0 && config.eta_c <= 1.0)) {
    add(report, "storage.eta_c", "eta_c must lie in (0, 1]");
  }
  if (!(config.eta_d > 0.0 && config.eta_d <= 1.0)) {
    add(report, "storage.eta_d", "eta_d must lie in (0, 1]");
  }
  if (!(config.eta_ev > 0.0 && config.eta_ev <= 1.0)) {
    add(report, "ev.eta", "EV charging efficiency must lie in (0, 1]");
  }

  // Full price/penalty chain. Requiring it strictly also forces
  // eta_c * eta_d < 1 whenever beta > 0. The penalty enters per delivered
  // kWh, so alpha is weighted by the EV efficiency.
  if (config.eta_c > 0.0 && config.eta_d > 0.0) {
    const double charge_value = config.eta_c * config.beta;
    const double discharge_cost = config.beta / config.eta_d;
    const double effective_alpha = config.alpha * config.eta_ev;
    const bool chain = tf.pi_off_minus < tf.pi_on_minus &&
                       tf.pi_on_minus < charge_value &&
                       charge_value < discharge_cost &&
                       discharge_cost < tf.pi_off_plus &&
                       tf.pi_off_plus < tf.pi_on_plus &&
                       tf.pi_on_plus < effective_alpha;
    if (!chain) {
      std::ostringstream oss;
      oss << "required: pi_off- < pi_on- < eta_c*beta < beta/eta_d < pi_off+ "
          << "< pi_on+ < alpha; got " << tf.pi_off_minus << " "
          << tf.pi_on_minus << " " << charge_value << " " << discharge_cost
          << " " << tf.pi_off_plus << " " << tf.pi_on_plus << " "
          << config.alpha * config.eta_ev;
      add(report, "price_penalty_chain", oss.str());
    }
  }

  if (!(config.capacity_B >= 0.0 && finite(config.capacity_B))) {
    add(report, "storage.capacity", "capacity must be >= 0");
  }
  if (config.e_chg_max < 0.0 || config.e_dis_max < 0.0) {
    add(report, "storage.rate_limits", "charge/discharge limits must be >= 0");
  }
  if (config.v_max < 0.0) {
    add(report, "ev.v_max", "charger cap must be >= 0");
  }
  if (!(config.s0 >= 0.0 && config.s0 <= config.capacity_B)) {
    add(report, "storage.s0", "initial SoC must lie in [0, capacity]");
  }
  if (config.y0 < 0.0) {
    add(report, "ev.y0", "initial charging demand must be >= 0");
  }

  for (size_t i = 0; i < config.devices.size(); ++i) {
    const DeviceUtility& dev = config.devices[i];
    if (!(dev.b > 0.0) || !finite(dev.b)) {
      add(report, "devices[" + std::to_string(i) + "].b",
          "marginal utility slope must be > 0");
    }
    if (dev.d_max < 0.0) {
      add(report, "devices[" + std::to_string(i) + "].d_max",
          "consumption cap must be >= 0");
    }
    if (!finite(dev.a)) {
      add(report, "devices[" + std::to_string(i) + "].a",
          "marginal utility intercept must be finite");
    }
  }

  return report;
}

HouseholdConfig normalize_ev_efficiency(HouseholdConfig config) {
  if (config.eta_ev != 1.0) {
    config.y0 /= config.eta_ev;
    config.alpha *= config.eta_ev;
    config.eta_ev = 1.0;
  }
  return config;
}

double net_consumption(const Action& action, double r) {
  return action.v + action.total_consumption() + action.e - r;
}

double nem_payment(double z, double pi_plus, double pi_minus, double pi_zero) {
  return z * (z >= 0.0 ? pi_plus : pi_minus) + pi_zero;
}

double consumption_utility(std::span<const DeviceUtility> devices,
                           std::span<const double> d) {
  double u = 0.0;
  for (size_t i = 0; i < devices.size(); ++i) {
    u += devices[i].utility(d[i]);
  }
  return u;
}

double stage_reward(const HouseholdConfig& config, const State& state,
                    const Action& action) {
  const double z = net_consumption(action, state.r);
  const double u = consumption_utility(config.devices, action.d);
  return u - nem_payment(z, state.price_plus, state.price_minus,
                         config.tariff.pi_zero);
}

double terminal_reward(double s_T, double y_T, double alpha, double beta) {
  return beta * s_T - alpha * y_T;
}

State step_dynamics(const HouseholdConfig& config, const State& state,
                    const Action& action, double r_next) {
  const double soc_delta =
      action.e >= 0.0 ? config.eta_c * action.e : action.e / config.eta_d;
  double s_next = state.s + soc_delta;
  double y_next = state.y - config.eta_ev * action.v;

  if (s_next < -kFeasTol || s_next > config.capacity_B + kFeasTol ||
      y_next < -kFeasTol) {
    std::ostringstream oss;
    oss << "infeasible transition at t=" << state.t << ": s'=" << s_next
        << " y'=" << y_next << " (B=" << config.capacity_B << ")";
    throw std::domain_error(oss.str());
  }
  s_next = std::clamp(s_next, 0.0, config.capacity_B);
  y_next = std::max(y_next, 0.0);

  State next;
  next.t = state.t + 1;
  next.s = s_next;
  next.y = y_next;
  next.r = r_next;
  if (next.t < config.horizon()) {
    next.price_plus = config.tariff.price_plus(next.t);
    next.price_minus = config.tariff.price_minus(next.t);
  }
  return next;
}

std::pair<double, double> effective_storage_bounds(
    double s, const HouseholdConfig& config) {
  const double dis = std::min(config.e_dis_max, s * config.eta_d);
  const double chg =
      std::min(config.e_chg_max, (config.capacity_B - s) / config.eta_c);
  return {std::max(dis, 0.0), std::max(chg, 0.0)};
}

double marginal_consumption(double pi, const DeviceUtility& device) {
  return std::clamp((device.a - pi) / device.b, 0.0, device.d_max);
}

double aggregate_consumption(double pi,
                             std::span<const DeviceUtility> devices) {
  double total = 0.0;
  for (const DeviceUtility& dev : devices) {
    total += marginal_consumption(pi, dev);
  }
  return total;
}

std::vector<double> consumption_profile(
    double pi, std::span<const DeviceUtility> devices) {
  std::vector<double> d(devices.size());
  for (size_t i = 0; i < devices.size(); ++i) {
    d[i] = marginal_consumption(pi, devices[i]);
  }
  return d;
}

}  // namespace nemco

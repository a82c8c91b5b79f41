#include "nemco/value_backward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nemco/model.hpp"
#include "nemco/policy.hpp"

namespace nemco {

std::vector<double> make_y_grid(const HouseholdConfig& config, double y_max,
                                double spacing) {
  if (!(y_max > 0.0)) {
    // Degenerate but legal (y0 = 0 everywhere); keep a two-point grid so the
    // PL machinery stays usable.
    return {0.0, std::max(config.v_max, 1.0)};
  }
  const double v = config.v_max;
  if (spacing <= 0.0) {
    spacing = (v > 0.0 && v <= y_max) ? v / 50.0 : y_max / 50.0;
  }
  if (v > 0.0) spacing = std::min(spacing, v / 4.0);

  std::vector<double> grid;
  const long steps = std::lround(std::ceil(y_max / spacing - 1e-9));
  grid.reserve(static_cast<size_t>(steps) + 8);
  for (long k = 0; k < steps; ++k) grid.push_back(k * spacing);
  grid.push_back(y_max);
  if (v > 0.0) {
    for (double m = v; m < y_max; m += v) grid.push_back(m);
  }
  std::sort(grid.begin(), grid.end());
  // Merge near-duplicates so breakpoints stay strictly increasing.
  const double merge_tol = spacing * 1e-9;
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    if (out.empty() || g - out.back() > merge_tol) out.push_back(g);
  }
  if (out.size() < 2) out.push_back(y_max > 0 ? y_max : 1.0);
  return out;
}

StorageFreeStep::StorageFreeStep(const HouseholdConfig& config,
                                 double price_plus, double price_minus,
                                 const ConcavePLFunction& vbar_next, double tau,
                                 double delta)
    : config_(config),
      price_plus_(price_plus),
      price_minus_(price_minus),
      vbar_next_(vbar_next),
      tau_(tau),
      delta_(delta) {}

StorageFreeStep::Solution StorageFreeStep::solve(double y, double r) const {
  const auto& devices = config_.devices;
  const double v_cap = config_.v_max;
  Solution sol;

  const double dplus = aggregate_consumption(price_plus_, devices) +
                       ev_clip(y, tau_, v_cap);
  const double dminus = aggregate_consumption(price_minus_, devices) +
                        ev_clip(y, delta_, v_cap);

  if (r < dplus) {
    sol.zone = -1;
    sol.v = ev_clip(y, tau_, v_cap);
    sol.d = consumption_profile(price_plus_, devices);
    sol.nu = price_plus_;
  } else if (r > dminus) {
    sol.zone = 1;
    sol.v = ev_clip(y, delta_, v_cap);
    sol.d = consumption_profile(price_minus_, devices);
    sol.nu = price_minus_;
  } else {
    sol.zone = 0;
    NuSolution alloc =
        solve_nu(r, y, price_minus_, price_plus_, devices, vbar_next_, v_cap);
    sol.v = alloc.v;
    sol.d = std::move(alloc.d);
    sol.nu = alloc.nu;
  }

  double total = sol.v;
  for (double di : sol.d) total += di;
  sol.z = total - r;
  const double payment = nem_payment(sol.z, price_plus_, price_minus_,
                                     config_.tariff.pi_zero);
  sol.value = consumption_utility(devices, sol.d) - payment +
              vbar_next_(std::max(y - sol.v, 0.0));
  return sol;
}

ValueTable backward_induct(
    const HouseholdConfig& config,
    const std::vector<std::vector<QuadNode>>& renewable_nodes,
    const std::vector<double>& y_grid) {
  const int T = config.horizon();
  if (static_cast<int>(renewable_nodes.size()) != T) {
    throw std::invalid_argument(
        "backward_induct: one renewable node set per interval required");
  }
  if (y_grid.size() < 2 || y_grid.front() != 0.0) {
    throw std::invalid_argument("backward_induct: y grid must start at 0");
  }
  if (config.v_max > 0.0) {
    for (size_t k = 0; k + 1 < y_grid.size(); ++k) {
      if (y_grid[k + 1] - y_grid[k] > config.v_max / 4.0 + 1e-12) {
        throw std::invalid_argument(
            "backward_induct: y grid spacing must be <= v_max/4");
      }
    }
  }

  ValueTable table;
  table.vbar.reserve(static_cast<size_t>(T) + 1);

  std::vector<double> terminal(y_grid.size());
  for (size_t k = 0; k < y_grid.size(); ++k) {
    terminal[k] = -config.alpha * y_grid[k];
  }
  // Build back-to-front, then reverse into t order.
  std::vector<ConcavePLFunction> rev;
  rev.emplace_back(y_grid, std::move(terminal));

  std::vector<double> vals(y_grid.size());
  for (int t = T - 1; t >= 0; --t) {
    const ConcavePLFunction& next = rev.back();
    const double pip = config.tariff.price_plus(t);
    const double pim = config.tariff.price_minus(t);
    const StorageFreeStep step(config, pip, pim, next, next.w_inverse(pip),
                               next.w_inverse(pim));
    const auto& nodes = renewable_nodes[static_cast<size_t>(t)];
    for (size_t k = 0; k < y_grid.size(); ++k) {
      double acc = 0.0;
      for (const QuadNode& node : nodes) {
        acc += node.weight * step.solve(y_grid[k], node.value).value;
      }
      vals[k] = acc;
    }
    ConcavePLFunction f(y_grid, vals);
    const double viol = f.max_concavity_violation();
    if (viol > ConcavePLFunction::kConcavityGate) {
      std::ostringstream oss;
      oss << "backward_induct: concavity violation " << viol << " at t=" << t
          << " exceeds gate " << ConcavePLFunction::kConcavityGate;
      throw std::runtime_error(oss.str());
    }
    table.max_concavity_violation =
        std::max(table.max_concavity_violation, viol);
    f.clamp_concavity();
    rev.push_back(std::move(f));
  }

  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    table.vbar.push_back(std::move(*it));
  }
  return table;
}

ThresholdTable compute_thresholds(const HouseholdConfig& config,
                                  const ValueTable& values) {
  const int T = config.horizon();
  if (values.horizon() != T) {
    throw std::invalid_argument("compute_thresholds: horizon mismatch");
  }
  const TariffSchedule& tf = config.tariff;
  const double charge_value = config.beta * config.eta_c;
  const double discharge_cost = config.beta / config.eta_d;

  ThresholdTable table;
  table.rows.resize(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const ConcavePLFunction& next = values.at(t + 1);
    ThresholdRow& row = table.rows[static_cast<size_t>(t)];
    const Period p = tf.period_of(t);

    if (p == Period::Off1) {
      row.tau = next.w_inverse(tf.pi_off_plus);
    } else {
      row.tau = (T - t - 1) * config.v_max;
    }
    if (p == Period::On && !tf.off2.empty()) {
      row.delta = next.w_inverse(tf.pi_on_minus);
    } else {
      row.delta = 0.0;
    }
    row.sigma_plus = next.w_inverse(discharge_cost);
    row.sigma_minus = next.w_inverse(charge_value);

    row.ordering_ok = row.tau > row.sigma_plus &&
                      row.sigma_plus > row.sigma_minus &&
                      row.sigma_minus > row.delta;
    // Non-strict chains must still hold; anything else is a real defect.
    if (!(row.tau >= row.sigma_plus - 1e-9 &&
          row.sigma_plus >= row.sigma_minus - 1e-9 &&
          row.sigma_minus >= row.delta - 1e-9)) {
      std::ostringstream oss;
      oss << "threshold ordering broken at t=" << t << ": tau=" << row.tau
          << " sigma+=" << row.sigma_plus << " sigma-=" << row.sigma_minus
          << " delta=" << row.delta;
      throw std::runtime_error(oss.str());
    }
  }
  return table;
}

DeltaBounds delta_boundaries(int t, double y, double s,
                             const HouseholdConfig& config,
                             const ThresholdTable& thresholds) {
  const ThresholdRow& row = thresholds.at(t);
  const auto [e_dis, e_chg] = effective_storage_bounds(s, config);
  const double pip = config.tariff.price_plus(t);
  const double pim = config.tariff.price_minus(t);
  const double charge_value = config.beta * config.eta_c;
  const double discharge_cost = config.beta / config.eta_d;
  const auto& devices = config.devices;

  DeltaBounds b;
  b.delta_plus =
      aggregate_consumption(pip, devices) + ev_clip(y, row.tau, config.v_max);
  b.delta_minus = aggregate_consumption(pim, devices) +
                  ev_clip(y, row.delta, config.v_max);

  const double load_sp = aggregate_consumption(discharge_cost, devices) +
                         ev_clip(y, row.sigma_plus, config.v_max);
  const double load_sm = aggregate_consumption(charge_value, devices) +
                         ev_clip(y, row.sigma_minus, config.v_max);

  b.dplus_prime = std::max(b.delta_plus - e_dis, 0.0);
  b.d1 = std::max(load_sp - e_dis, 0.0);
  b.d2 = load_sp;
  b.d3 = load_sm;
  b.d4 = load_sm + e_chg;
  b.dminus_prime = b.delta_minus + e_chg;

  // The chain is monotone by construction; enforce it against round-off so
  // the case ladder never sees inverted seams.
  b.d1 = std::max(b.d1, b.dplus_prime);
  b.d2 = std::max(b.d2, b.d1);
  b.d3 = std::max(b.d3, b.d2);
  b.d4 = std::max(b.d4, b.d3);
  b.dminus_prime = std::max(b.dminus_prime, b.d4);
  return b;
}

void export_value_table(const ValueTable& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,y,value,slope\n";
  char buf[160];
  for (size_t t = 0; t < values.vbar.size(); ++t) {
    const ConcavePLFunction& f = values.vbar[t];
    const auto ys = f.breakpoints();
    const auto vs = f.values();
    const auto ss = f.slopes();
    for (size_t k = 0; k < ys.size(); ++k) {
      if (k < ss.size()) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", t, ys[k],
                      vs[k], ss[k]);
      } else {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,\n", t, ys[k], vs[k]);
      }
      out << buf;
    }
  }
}

void export_threshold_table(const ThresholdTable& table,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,tau,delta,sigma_plus,sigma_minus\n";
  char buf[160];
  for (size_t t = 0; t < table.rows.size(); ++t) {
    const ThresholdRow& row = table.rows[t];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g\n", t,
                  row.tau, row.delta, row.sigma_plus, row.sigma_minus);
    out << buf;
  }
}

}  // namespace nemco

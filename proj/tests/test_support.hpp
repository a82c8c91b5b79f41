#pragma once

// Shared fixtures and independent search oracles for the test suite. The
// search oracles enumerate actions on a fine grid and know nothing about
// thresholds or supergradients, so they check the policy machinery from the
// outside.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <vector>

#include "nemco/concave_pl.hpp"
#include "nemco/distribution.hpp"
#include "nemco/model.hpp"
#include "nemco/rng.hpp"
#include "nemco/types.hpp"

namespace nemco::testing {

// Two-interval household with one quadratic device; small enough to verify
// by hand and against brute force.
inline HouseholdConfig tiny_two_interval_config() {
  HouseholdConfig cfg;
  cfg.capacity_B = 10.0;
  cfg.s0 = 5.0;
  cfg.e_chg_max = 0.5;
  cfg.e_dis_max = 0.5;
  cfg.eta_c = 0.9;
  cfg.eta_d = 0.9;
  cfg.v_max = 1.0;
  cfg.eta_ev = 1.0;
  cfg.y0 = 1.5;
  cfg.alpha = 1.0;
  cfg.beta = 0.4;
  cfg.devices = {{1.0, 0.5, 2.0}};
  cfg.tariff.horizon_T = 2;
  cfg.tariff.off1 = {0, 2};
  cfg.tariff.on = {2, 2};
  cfg.tariff.off2 = {2, 2};
  cfg.tariff.pi_off_plus = 0.6;
  cfg.tariff.pi_off_minus = 0.1;
  cfg.tariff.pi_on_plus = 0.8;
  cfg.tariff.pi_on_minus = 0.2;
  return cfg;
}

inline HouseholdConfig storage_free(HouseholdConfig cfg) {
  cfg.capacity_B = 0.0;
  cfg.s0 = 0.0;
  cfg.e_chg_max = 0.0;
  cfg.e_dis_max = 0.0;
  return cfg;
}

// Physical parameters from the benchmark setting: 13.5 kWh battery at
// 3.2 kW and 95% efficiency, 3.6 kW charger, 16 h horizon with a 5 h
// on-peak block.
inline HouseholdConfig paper_scale_config() {
  HouseholdConfig cfg;
  cfg.capacity_B = 13.5;
  cfg.s0 = 6.75;
  cfg.e_chg_max = 3.2;
  cfg.e_dis_max = 3.2;
  cfg.eta_c = 0.95;
  cfg.eta_d = 0.95;
  cfg.v_max = 3.6;
  cfg.eta_ev = 1.0;
  cfg.y0 = 9.0;
  cfg.alpha = 1.0;
  cfg.beta = 0.30;
  cfg.devices = {{0.9, 0.35, 4.0}};
  cfg.tariff.horizon_T = 16;
  cfg.tariff.off1 = {0, 8};
  cfg.tariff.on = {8, 13};
  cfg.tariff.off2 = {13, 16};
  cfg.tariff.pi_off_plus = 0.40;
  cfg.tariff.pi_off_minus = 0.10;
  cfg.tariff.pi_on_plus = 0.55;
  cfg.tariff.pi_on_minus = 0.25;
  return cfg;
}

inline std::vector<std::vector<QuadNode>> point_nodes(
    std::initializer_list<double> rs) {
  std::vector<std::vector<QuadNode>> nodes;
  for (double r : rs) nodes.push_back({{r, 1.0}});
  return nodes;
}

struct SearchResult {
  double v = 0.0;
  double e = 0.0;
  double d = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Best consumption per net position q = v + e, tabulated by scanning d.
class BestConsumption {
 public:
  BestConsumption(const DeviceUtility& dev, double pi_plus, double pi_minus,
                  double pi_zero, double r, long q_min, long q_max, double res,
                  double dres)
      : q_min_(q_min) {
    best_.resize(static_cast<size_t>(q_max - q_min + 1));
    arg_.resize(best_.size());
    std::vector<double> ds;
    for (double d = 0.0; d < dev.d_max - 1e-12; d += dres) ds.push_back(d);
    ds.push_back(dev.d_max);
    for (long q = q_min; q <= q_max; ++q) {
      double best = -std::numeric_limits<double>::infinity();
      double arg = 0.0;
      for (double d : ds) {
        const double z = q * res + d - r;
        const double val =
            dev.utility(d) - nem_payment(z, pi_plus, pi_minus, pi_zero);
        if (val > best) {
          best = val;
          arg = d;
        }
      }
      best_[static_cast<size_t>(q - q_min_)] = best;
      arg_[static_cast<size_t>(q - q_min_)] = arg;
    }
  }

  double value(long q) const { return best_[static_cast<size_t>(q - q_min_)]; }
  double arg(long q) const { return arg_[static_cast<size_t>(q - q_min_)]; }

 private:
  long q_min_;
  std::vector<double> best_;
  std::vector<double> arg_;
};

// Exhaustive argmax of the one-step storage-free objective
//   U(d) - P(v + d - r) + vbar_next(y - v).
inline SearchResult search_storage_free_step(const HouseholdConfig& cfg,
                                             const ConcavePLFunction& vbar_next,
                                             double pi_plus, double pi_minus,
                                             double y, double r,
                                             double res = 1e-3) {
  const long nv = std::lround(std::floor(std::min(y, cfg.v_max) / res + 1e-9));
  const BestConsumption bc(cfg.devices.front(), pi_plus, pi_minus,
                           cfg.tariff.pi_zero, r, 0, nv, res, res);
  SearchResult out;
  for (long vi = 0; vi <= nv; ++vi) {
    const double v = vi * res;
    const double val = bc.value(vi) + vbar_next(y - v);
    if (val > out.value) {
      out.value = val;
      out.v = v;
      out.d = bc.arg(vi);
    }
  }
  return out;
}

// Exhaustive argmax of the one-step objective with storage valued at its
// salvage rate:
//   U(d) - P(v + d + e - r) + beta*(eta_c e or e/eta_d) + vbar_next(y - v).
inline SearchResult search_myopic_step(const HouseholdConfig& cfg,
                                       const ConcavePLFunction& vbar_next,
                                       double pi_plus, double pi_minus,
                                       double y, double s, double r,
                                       double res = 1e-3) {
  const auto [e_dis, e_chg] = effective_storage_bounds(s, cfg);
  const long nv = std::lround(std::floor(std::min(y, cfg.v_max) / res + 1e-9));
  const long ned = std::lround(std::floor(e_dis / res + 1e-9));
  const long nec = std::lround(std::floor(e_chg / res + 1e-9));
  const BestConsumption bc(cfg.devices.front(), pi_plus, pi_minus,
                           cfg.tariff.pi_zero, r, -ned, nv + nec, res, res);
  SearchResult out;
  for (long vi = 0; vi <= nv; ++vi) {
    const double v = vi * res;
    const double cont = vbar_next(y - v);
    for (long j = -ned; j <= nec; ++j) {
      const double e = j * res;
      const double salvage =
          cfg.beta * (e >= 0.0 ? cfg.eta_c * e : e / cfg.eta_d);
      const double val = bc.value(vi + j) + salvage + cont;
      if (val > out.value) {
        out.value = val;
        out.v = v;
        out.e = e;
        out.d = bc.arg(vi + j);
      }
    }
  }
  return out;
}

// Random config with the full price/penalty chain satisfied by
// construction. Efficiencies are recovered from the sampled chain points.
inline HouseholdConfig random_config(CounterRng& rng, int T,
                                     bool with_storage = true) {
  const auto gap = [&](double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
  };
  double chain[7];
  chain[0] = gap(0.02, 0.08);                    // pi_off-
  for (int i = 1; i < 7; ++i) chain[i] = chain[i - 1] + gap(0.04, 0.25);
  const double eta = std::sqrt(chain[2] / chain[3]);  // eta_c = eta_d
  HouseholdConfig cfg;
  cfg.eta_c = eta;
  cfg.eta_d = eta;
  cfg.beta = chain[2] / eta;
  cfg.alpha = chain[6];
  cfg.tariff.pi_off_minus = chain[0];
  cfg.tariff.pi_on_minus = chain[1];
  cfg.tariff.pi_off_plus = chain[4];
  cfg.tariff.pi_on_plus = chain[5];
  cfg.tariff.pi_zero = 0.0;

  cfg.tariff.horizon_T = T;
  const int on_start = static_cast<int>(rng.uniform_int(0, T - 1));
  const int on_end = static_cast<int>(rng.uniform_int(on_start, T));
  cfg.tariff.off1 = {0, on_start};
  cfg.tariff.on = {on_start, on_end};
  cfg.tariff.off2 = {on_end, T};

  const int devices = static_cast<int>(rng.uniform_int(1, 2));
  for (int i = 0; i < devices; ++i) {
    DeviceUtility dev;
    dev.a = gap(cfg.beta, 1.4 * cfg.alpha);
    dev.b = gap(0.25, 1.5);
    dev.d_max = gap(0.5, 3.0);
    cfg.devices.push_back(dev);
  }

  cfg.v_max = gap(0.3, 1.2);
  cfg.y0 = gap(0.3, std::min(3.0, T * cfg.v_max));
  cfg.eta_ev = 1.0;
  if (with_storage) {
    cfg.e_chg_max = gap(0.2, 1.0);
    cfg.e_dis_max = gap(0.2, 1.0);
    cfg.capacity_B = gap(2.0, 14.0);
    cfg.s0 = cfg.capacity_B * gap(0.2, 0.8);
  } else {
    cfg.e_chg_max = 0.0;
    cfg.e_dis_max = 0.0;
    cfg.capacity_B = 0.0;
    cfg.s0 = 0.0;
  }
  return cfg;
}

// Random per-interval renewable nodes: mixes point masses and two-point
// distributions so quadrature stays exact.
inline std::vector<std::vector<QuadNode>> random_nodes(CounterRng& rng, int T,
                                                       double r_scale) {
  std::vector<std::vector<QuadNode>> nodes(static_cast<size_t>(T));
  for (auto& per_t : nodes) {
    if (rng.uniform01() < 0.4) {
      per_t = {{r_scale * rng.uniform01(), 1.0}};
    } else {
      const double p = 0.2 + 0.6 * rng.uniform01();
      per_t = {{r_scale * rng.uniform01(), p},
               {r_scale * (1.0 + rng.uniform01()), 1.0 - p}};
    }
  }
  return nodes;
}

}  // namespace nemco::testing

#pragma once

#include <numeric>
#include <string>
#include <vector>

namespace nemco {

/// Absolute tolerance for feasibility checks on kWh quantities.
inline constexpr double kFeasTol = 1e-9;

/// Half-open interval index range [begin, end).
struct IndexRange {
  int begin = 0;
  int end = 0;

  bool contains(int t) const { return t >= begin && t < end; }
  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

enum class Period { Off1, On, Off2 };

/// Two price-level time-of-use tariff under net metering. The horizon is
/// partitioned into an off-peak block, an on-peak block, and a trailing
/// off-peak block (either off block may be empty). Net consumption is billed
/// at the import rate pi_*_plus and credited at the export rate pi_*_minus.
struct TariffSchedule {
  int horizon_T = 0;
  IndexRange off1, on, off2;
  double pi_off_plus = 0.0;
  double pi_off_minus = 0.0;
  double pi_on_plus = 0.0;
  double pi_on_minus = 0.0;
  double pi_zero = 0.0;  // fixed charge per interval

  Period period_of(int t) const {
    if (on.contains(t)) return Period::On;
    if (off2.contains(t)) return Period::Off2;
    return Period::Off1;
  }
  double price_plus(int t) const {
    return period_of(t) == Period::On ? pi_on_plus : pi_off_plus;
  }
  double price_minus(int t) const {
    return period_of(t) == Period::On ? pi_on_minus : pi_off_minus;
  }
};

/// Quadratic concave utility U(d) = a*d - b*d^2/2 on [0, d_max], with
/// strictly decreasing marginal utility L(d) = a - b*d.
struct DeviceUtility {
  double a = 0.0;      // marginal utility at d = 0 (currency/kWh)
  double b = 0.0;      // marginal utility slope (currency/kWh^2), > 0
  double d_max = 0.0;  // consumption cap (kWh/interval)

  double utility(double d) const { return a * d - 0.5 * b * d * d; }
  double marginal(double d) const { return a - b * d; }
};

/// All physical and economic constants of one household.
struct HouseholdConfig {
  // storage
  double capacity_B = 0.0;   // kWh
  double e_chg_max = 0.0;    // max charge per interval (kWh)
  double e_dis_max = 0.0;    // max discharge per interval (kWh)
  double eta_c = 1.0;        // charge efficiency in (0, 1]
  double eta_d = 1.0;        // discharge efficiency in (0, 1]
  double s0 = 0.0;           // initial state of charge (kWh)

  // EV
  double v_max = 0.0;        // charger cap per interval (kWh)
  double eta_ev = 1.0;       // EV charging efficiency
  double y0 = 0.0;           // initial charging demand (kWh)

  // economics
  double alpha = 0.0;        // unmet-demand penalty (currency/kWh)
  double beta = 0.0;         // storage salvage value (currency/kWh)

  std::vector<DeviceUtility> devices;
  TariffSchedule tariff;

  int horizon() const { return tariff.horizon_T; }
};

/// Observed state at the start of interval t: SoC, remaining EV demand,
/// realized renewable, and the interval's price pair.
struct State {
  int t = 0;
  double s = 0.0;           // SoC in [0, B]
  double y = 0.0;           // remaining EV demand in [0, y0]
  double r = 0.0;           // realized renewable (kWh), >= 0
  double price_plus = 0.0;
  double price_minus = 0.0;
};

/// One interval's decision: EV charge v, storage operation e (>= 0 charge,
/// <= 0 discharge), and per-device consumption d.
struct Action {
  double v = 0.0;
  double e = 0.0;
  std::vector<double> d;

  double total_consumption() const {
    return std::accumulate(d.begin(), d.end(), 0.0);
  }
};

struct Violation {
  std::string name;    // stable identifier, e.g. "price_penalty_chain"
  std::string detail;  // human-readable description
};

/// Result of config validation. Violations are data, not faults.
struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

}  // namespace nemco

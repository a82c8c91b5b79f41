#pragma once

#include <string>
#include <vector>

#include "nemco/concave_pl.hpp"
#include "nemco/distribution.hpp"
#include "nemco/types.hpp"

namespace nemco {

/// Per-interval policy thresholds on remaining EV demand (kWh).
///
///   tau          charge-from-grid threshold
///   delta        charge-from-surplus threshold
///   sigma_plus   EV vs storage-discharge priority threshold
///   sigma_minus  EV vs storage-charge priority threshold
///
/// tau >= sigma_plus >= sigma_minus >= delta holds for valid configs;
/// ordering_ok flags rows where strictness degenerates to a tie at grid
/// resolution.
struct ThresholdRow {
  double tau = 0.0;
  double delta = 0.0;
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
  bool ordering_ok = true;
};

struct ThresholdTable {
  std::vector<ThresholdRow> rows;  // one per interval t

  const ThresholdRow& at(int t) const { return rows.at(static_cast<size_t>(t)); }
};

/// Expected storage-free value functions, one per interval plus the terminal
/// -alpha*y. vbar[t] covers remaining demand on the common y grid.
struct ValueTable {
  std::vector<ConcavePLFunction> vbar;  // size T+1, indexed by t
  double max_concavity_violation = 0.0;  // worst pre-clamp slope increase

  const ConcavePLFunction& at(int t) const {
    return vbar.at(static_cast<size_t>(t));
  }
  int horizon() const { return static_cast<int>(vbar.size()) - 1; }
};

/// Uniform y grid on [0, y_max] that always contains 0, y_max, and every
/// multiple of v_max below y_max (so charge-capacity thresholds land on
/// breakpoints exactly). Default spacing is min(v_max, y_max)/50, aligned to
/// the v_max lattice when possible.
std::vector<double> make_y_grid(const HouseholdConfig& config, double y_max,
                                double spacing = 0.0);

/// Solves the storage-free one-step problem for one realized renewable:
/// maximize U(d) - P(v + sum d - r) + vbar_next(y - v) over feasible (v, d).
/// Zone boundaries use the supplied tau/delta; the net-zero interior solves
/// the marginal price nu so that total load matches r exactly.
class StorageFreeStep {
 public:
  StorageFreeStep(const HouseholdConfig& config, double price_plus,
                  double price_minus, const ConcavePLFunction& vbar_next,
                  double tau, double delta);

  struct Solution {
    double v = 0.0;
    std::vector<double> d;
    double nu = 0.0;      // marginal price; price_plus/minus in outer zones
    double z = 0.0;
    double value = 0.0;   // stage surplus + continuation
    int zone = 0;         // -1 net-consuming, 0 net-zero, +1 net-producing
  };

  Solution solve(double y, double r) const;

  double tau() const { return tau_; }
  double delta() const { return delta_; }

 private:
  const HouseholdConfig& config_;
  double price_plus_;
  double price_minus_;
  const ConcavePLFunction& vbar_next_;
  double tau_;
  double delta_;
};

/// Backward induction of the expected storage-free value functions
/// (terminal vbar[T](y) = -alpha*y). renewable_nodes[t] holds the quadrature
/// nodes of interval t's renewable distribution. Fails if any pre-clamp
/// concavity violation exceeds ConcavePLFunction::kConcavityGate, which
/// signals an inner-solver or quadrature bug rather than round-off.
ValueTable backward_induct(const HouseholdConfig& config,
                           const std::vector<std::vector<QuadNode>>& renewable_nodes,
                           const std::vector<double>& y_grid);

/// Threshold extraction per interval:
///   tau   = (T-t-1)*v_max on on-peak and trailing off-peak intervals,
///           w_{t+1}(pi_off+) on leading off-peak intervals
///   delta = 0 off-peak, and on-peak when no trailing off-peak exists;
///           w_{t+1}(pi_on-) otherwise
///   sigma_plus  = w_{t+1}(beta/eta_d)
///   sigma_minus = w_{t+1}(beta*eta_c)
/// Ordering violations are flagged per row, never fatal.
ThresholdTable compute_thresholds(const HouseholdConfig& config,
                                  const ValueTable& values);

/// The eight renewable-axis boundaries at (t, y, s). Storage widens the
/// storage-free net-zero zone [delta_plus, delta_minus] into
/// [dplus_prime, dminus_prime], split by d1..d4 into the five net-zero
/// dispatch cases. The chain dplus_prime <= d1 <= d2 <= d3 <= d4 <=
/// dminus_prime always holds.
struct DeltaBounds {
  double delta_plus = 0.0;   // storage-free import boundary
  double delta_minus = 0.0;  // storage-free export boundary
  double dplus_prime = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
  double dminus_prime = 0.0;
};

DeltaBounds delta_boundaries(int t, double y, double s,
                             const HouseholdConfig& config,
                             const ThresholdTable& thresholds);

/// CSV export, columns: t,y,value,slope (slope of the segment to the right
/// of y; blank for the last breakpoint).
void export_value_table(const ValueTable& values, const std::string& path);

/// CSV export, columns: t,tau,delta,sigma_plus,sigma_minus.
void export_threshold_table(const ThresholdTable& table,
                            const std::string& path);

}  // namespace nemco

#pragma once

#include <span>
#include <vector>

namespace nemco {

/// Piecewise-linear concave function on an explicit breakpoint grid.
///
/// Slopes between consecutive breakpoints must be non-increasing left to
/// right. Backward induction produces values that are concave up to floating
/// point noise; max_concavity_violation() reports the worst pre-clamp
/// violation and clamp_concavity() projects the slopes onto the
/// non-increasing cone (width-weighted isotonic regression, anchored at the
/// leftmost value).
class ConcavePLFunction {
 public:
  /// Maximum tolerated slope increase before clamping is considered unsafe.
  static constexpr double kConcavityGate = 1e-6;
  /// Slack used when comparing slopes against a query price in w_inverse;
  /// keeps exact ties (slope == -price) stable under quadrature round-off.
  static constexpr double kSlopeTol = 1e-9;

  /// Breakpoints must be strictly increasing; sizes must match and be >= 2.
  ConcavePLFunction(std::vector<double> breakpoints, std::vector<double> values);

  std::span<const double> breakpoints() const { return ys_; }
  std::span<const double> values() const { return vals_; }
  std::span<const double> slopes() const { return slopes_; }

  double min() const { return ys_.front(); }
  double max() const { return ys_.back(); }

  /// Linear interpolation. Arguments outside the grid span (beyond kEvalSlack)
  /// throw std::out_of_range; within slack they are clamped to the span.
  double operator()(double y) const;

  /// Right-hand slope at y. At the right endpoint returns -infinity (no
  /// segment to the right).
  double right_slope(double y) const;

  /// Left-hand slope at y. At the left endpoint returns -infinity by
  /// convention (no left slope exists; reported as open).
  double left_slope(double y) const;

  struct Supergradient {
    double lo;  // right slope
    double hi;  // left slope
  };

  /// Supergradient interval [right slope, left slope] at y. Off breakpoints
  /// both ends coincide.
  Supergradient supergradient(double y) const;

  /// Largest y in the span whose right slope is >= -price (up to kSlopeTol).
  /// Returns the left endpoint when -price is above every slope and the right
  /// endpoint when it is below every slope. Ties resolve to the largest
  /// qualifying y, which makes the inverse right-continuous in price.
  double w_inverse(double price) const;

  /// Lower end of the tie run at -price: the largest y whose right slope is
  /// strictly greater than -price. Equals w_inverse wherever no segment
  /// slope ties with -price exactly.
  double w_inverse_strict(double price) const;

  /// Max over consecutive slope pairs of slope[k+1] - slope[k] (> 0 means a
  /// concavity violation).
  double max_concavity_violation() const;

  /// Projects slopes onto the non-increasing cone and rebuilds values from
  /// the left anchor. No-op when already concave.
  void clamp_concavity();

 private:
  static constexpr double kEvalSlack = 1e-9;

  size_t segment_of(double y) const;
  void rebuild_slopes();

  std::vector<double> ys_;
  std::vector<double> vals_;
  std::vector<double> slopes_;
};

}  // namespace nemco

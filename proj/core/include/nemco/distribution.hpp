#pragma once

#include <string>
#include <vector>

namespace nemco {

/// Inverse standard normal CDF (Wichura's AS241, double precision).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// One-dimensional non-negative distribution used for renewable output and
/// EV charging demand. Sampling and quadrature both go through quantile(),
/// so a single uniform draw maps to the same value everywhere.
///
/// Families:
///   PointMass        value
///   Enumerated       discrete values with probabilities (used by tests and
///                    scenario-tree oracles; quadrature is exact)
///   TruncatedNormal  normal(mean, sd) truncated to [lo, hi]
///   LogNormal        exp(mu + sigma * Z)
///   Histogram        piecewise-uniform bins (edges, weights)
/// Every quantile is multiplied by `scale` (> 0).
struct DistributionSpec {
  enum class Family {
    PointMass,
    Enumerated,
    TruncatedNormal,
    LogNormal,
    Histogram,
  };

  Family family = Family::PointMass;
  double scale = 1.0;

  // PointMass
  double value = 0.0;

  // Enumerated
  std::vector<double> values;
  std::vector<double> probs;

  // TruncatedNormal
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;
  double hi = 0.0;  // <= lo means unbounded above

  // LogNormal
  double mu = 0.0;
  double sigma = 1.0;

  // Histogram: len(edges) == len(weights) + 1, edges increasing
  std::vector<double> edges;
  std::vector<double> weights;

  static DistributionSpec point(double v);
  static DistributionSpec enumerated(std::vector<double> values,
                                     std::vector<double> probs);
  static DistributionSpec truncated_normal(double mean, double sd, double lo,
                                           double hi);
  static DistributionSpec log_normal(double mu, double sigma);
  static DistributionSpec histogram(std::vector<double> edges,
                                    std::vector<double> weights);

  /// Inverse CDF at p in (0, 1), times scale.
  double quantile(double p) const;

  /// Least upper bound of the support (may be +infinity for LogNormal and
  /// unbounded TruncatedNormal).
  double upper_bound() const;

  /// Throws std::invalid_argument when parameters are inconsistent or the
  /// support is negative.
  void validate() const;
};

struct QuadNode {
  double value;
  double weight;
};

struct QuadratureSpec {
  int nodes = 64;
};

/// Deterministic quadrature of a distribution: equi-probability quantile
/// nodes at p = (k + 1/2)/n with weight 1/n. Enumerated and point-mass
/// families return their exact atoms instead.
std::vector<QuadNode> make_quadrature(const DistributionSpec& dist,
                                      const QuadratureSpec& spec);

/// Mean of the quadrature nodes; used for certainty-equivalent forecasts.
double quadrature_mean(const std::vector<QuadNode>& nodes);

}  // namespace nemco

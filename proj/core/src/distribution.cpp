#include "nemco/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nemco {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// AS241 algorithm PPND16 (Wichura 1988); relative error ~1e-16 away from the
// extreme tails.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile requires p in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double result;
  if (r <= 5.0) {
    r -= 1.6;
    result =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    result =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return q < 0.0 ? -result : result;
}

DistributionSpec DistributionSpec::point(double v) {
  DistributionSpec d;
  d.family = Family::PointMass;
  d.value = v;
  return d;
}

DistributionSpec DistributionSpec::enumerated(std::vector<double> values,
                                              std::vector<double> probs) {
  DistributionSpec d;
  d.family = Family::Enumerated;
  d.values = std::move(values);
  d.probs = std::move(probs);
  return d;
}

DistributionSpec DistributionSpec::truncated_normal(double mean, double sd,
                                                    double lo, double hi) {
  DistributionSpec d;
  d.family = Family::TruncatedNormal;
  d.mean = mean;
  d.sd = sd;
  d.lo = lo;
  d.hi = hi;
  return d;
}

DistributionSpec DistributionSpec::log_normal(double mu, double sigma) {
  DistributionSpec d;
  d.family = Family::LogNormal;
  d.mu = mu;
  d.sigma = sigma;
  return d;
}

DistributionSpec DistributionSpec::histogram(std::vector<double> edges,
                                             std::vector<double> weights) {
  DistributionSpec d;
  d.family = Family::Histogram;
  d.edges = std::move(edges);
  d.weights = std::move(weights);
  return d;
}

void DistributionSpec::validate() const {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("distribution scale must be > 0");
  }
  switch (family) {
    case Family::PointMass:
      if (value < 0.0) throw std::invalid_argument("point mass must be >= 0");
      break;
    case Family::Enumerated: {
      if (values.empty() || values.size() != probs.size()) {
        throw std::invalid_argument("enumerated values/probs size mismatch");
      }
      double total = 0.0;
      for (size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0) {
          throw std::invalid_argument("enumerated values must be >= 0");
        }
        if (probs[i] < 0.0) {
          throw std::invalid_argument("enumerated probs must be >= 0");
        }
        total += probs[i];
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("enumerated probs must sum to 1");
      }
      break;
    }
    case Family::TruncatedNormal:
      if (!(sd > 0.0)) throw std::invalid_argument("sd must be > 0");
      if (lo < 0.0) throw std::invalid_argument("support must be >= 0");
      if (hi > lo && !(hi > lo)) throw std::invalid_argument("hi must be > lo");
      break;
    case Family::LogNormal:
      if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
      break;
    case Family::Histogram: {
      if (edges.size() != weights.size() + 1 || weights.empty()) {
        throw std::invalid_argument("histogram needs n+1 edges for n weights");
      }
      if (edges.front() < 0.0) {
        throw std::invalid_argument("histogram support must be >= 0");
      }
      double total = 0.0;
      for (size_t i = 0; i < weights.size(); ++i) {
        if (!(edges[i] < edges[i + 1])) {
          throw std::invalid_argument("histogram edges must be increasing");
        }
        if (weights[i] < 0.0) {
          throw std::invalid_argument("histogram weights must be >= 0");
        }
        total += weights[i];
      }
      if (!(total > 0.0)) {
        throw std::invalid_argument("histogram weights must not all be zero");
      }
      break;
    }
  }
}

double DistributionSpec::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile requires p in (0, 1)");
  }
  switch (family) {
    case Family::PointMass:
      return scale * value;
    case Family::Enumerated: {
      double acc = 0.0;
      for (size_t i = 0; i < values.size(); ++i) {
        acc += probs[i];
        if (p <= acc + 1e-15) return scale * values[i];
      }
      return scale * values.back();
    }
    case Family::TruncatedNormal: {
      const double a = normal_cdf((lo - mean) / sd);
      const double b =
          hi > lo ? normal_cdf((hi - mean) / sd) : 1.0;
      const double pp = a + p * (b - a);
      const double z = normal_quantile(std::clamp(pp, 1e-300, 1.0 - 1e-16));
      double x = mean + sd * z;
      x = std::max(x, lo);
      if (hi > lo) x = std::min(x, hi);
      return scale * x;
    }
    case Family::LogNormal:
      return scale * std::exp(mu + sigma * normal_quantile(p));
    case Family::Histogram: {
      const double total =
          std::accumulate(weights.begin(), weights.end(), 0.0);
      double target = p * total;
      for (size_t i = 0; i < weights.size(); ++i) {
        if (target <= weights[i] || i + 1 == weights.size()) {
          const double frac =
              weights[i] > 0.0 ? std::clamp(target / weights[i], 0.0, 1.0)
                               : 0.0;
          return scale * (edges[i] + frac * (edges[i + 1] - edges[i]));
        }
        target -= weights[i];
      }
      return scale * edges.back();
    }
  }
  return 0.0;
}

double DistributionSpec::upper_bound() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (family) {
    case Family::PointMass:
      return scale * value;
    case Family::Enumerated:
      return scale * *std::max_element(values.begin(), values.end());
    case Family::TruncatedNormal:
      return hi > lo ? scale * hi : inf;
    case Family::LogNormal:
      return inf;
    case Family::Histogram:
      return scale * edges.back();
  }
  return inf;
}

std::vector<QuadNode> make_quadrature(const DistributionSpec& dist,
                                      const QuadratureSpec& spec) {
  dist.validate();
  std::vector<QuadNode> nodes;
  if (dist.family == DistributionSpec::Family::PointMass) {
    nodes.push_back({dist.scale * dist.value, 1.0});
    return nodes;
  }
  if (dist.family == DistributionSpec::Family::Enumerated) {
    nodes.reserve(dist.values.size());
    for (size_t i = 0; i < dist.values.size(); ++i) {
      if (dist.probs[i] > 0.0) {
        nodes.push_back({dist.scale * dist.values[i], dist.probs[i]});
      }
    }
    return nodes;
  }
  if (spec.nodes < 1) {
    throw std::invalid_argument("quadrature needs at least one node");
  }
  nodes.reserve(static_cast<size_t>(spec.nodes));
  const double w = 1.0 / spec.nodes;
  for (int k = 0; k < spec.nodes; ++k) {
    const double p = (k + 0.5) * w;
    nodes.push_back({dist.quantile(p), w});
  }
  return nodes;
}

double quadrature_mean(const std::vector<QuadNode>& nodes) {
  double m = 0.0;
  for (const QuadNode& n : nodes) m += n.weight * n.value;
  return m;
}

}  // namespace nemco

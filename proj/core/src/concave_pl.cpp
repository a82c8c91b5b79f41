#include "nemco/concave_pl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nemco {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ConcavePLFunction::ConcavePLFunction(std::vector<double> breakpoints,
                                     std::vector<double> values)
    : ys_(std::move(breakpoints)), vals_(std::move(values)) {
  if (ys_.size() < 2 || ys_.size() != vals_.size()) {
    throw std::invalid_argument(
        "ConcavePLFunction needs >= 2 breakpoints with matching values");
  }
  for (size_t k = 0; k + 1 < ys_.size(); ++k) {
    if (!(ys_[k] < ys_[k + 1])) {
      throw std::invalid_argument(
          "ConcavePLFunction breakpoints must be strictly increasing");
    }
  }
  rebuild_slopes();
}

void ConcavePLFunction::rebuild_slopes() {
  slopes_.resize(ys_.size() - 1);
  for (size_t k = 0; k + 1 < ys_.size(); ++k) {
    slopes_[k] = (vals_[k + 1] - vals_[k]) / (ys_[k + 1] - ys_[k]);
  }
}

size_t ConcavePLFunction::segment_of(double y) const {
  // Index k such that ys_[k] <= y < ys_[k+1]; the last segment also owns the
  // right endpoint.
  const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
  size_t k = static_cast<size_t>(it - ys_.begin());
  if (k == 0) return 0;
  k -= 1;
  return std::min(k, ys_.size() - 2);
}

double ConcavePLFunction::operator()(double y) const {
  if (y < ys_.front() - kEvalSlack || y > ys_.back() + kEvalSlack) {
    std::ostringstream oss;
    oss << "evaluation at y=" << y << " outside grid span [" << ys_.front()
        << ", " << ys_.back() << "]";
    throw std::out_of_range(oss.str());
  }
  const double yc = std::clamp(y, ys_.front(), ys_.back());
  const size_t k = segment_of(yc);
  return vals_[k] + slopes_[k] * (yc - ys_[k]);
}

double ConcavePLFunction::right_slope(double y) const {
  if (y >= ys_.back()) return kNegInf;
  return slopes_[segment_of(y)];
}

double ConcavePLFunction::left_slope(double y) const {
  if (y <= ys_.front()) return kNegInf;
  const size_t k = segment_of(y);
  if (y > ys_[k] || k == 0) return slopes_[k];
  return slopes_[k - 1];
}

ConcavePLFunction::Supergradient ConcavePLFunction::supergradient(
    double y) const {
  if (y < ys_.front() - kEvalSlack || y > ys_.back() + kEvalSlack) {
    throw std::out_of_range("supergradient query outside grid span");
  }
  return {right_slope(y), left_slope(y)};
}

double ConcavePLFunction::w_inverse(double price) const {
  const double target = -price;
  // Slopes are non-increasing, so the segments whose slope qualifies form a
  // prefix. Find the last k with slopes_[k] >= target - kSlopeTol.
  size_t lo = 0, hi = slopes_.size();  // first index that fails
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (slopes_[mid] >= target - kSlopeTol) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == 0) return ys_.front();
  return ys_[lo];  // right end of the last qualifying segment
}

double ConcavePLFunction::w_inverse_strict(double price) const {
  const double target = -price;
  size_t lo = 0, hi = slopes_.size();
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (slopes_[mid] > target + kSlopeTol) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == 0) return ys_.front();
  return ys_[lo];
}

double ConcavePLFunction::max_concavity_violation() const {
  double worst = 0.0;
  for (size_t k = 0; k + 1 < slopes_.size(); ++k) {
    worst = std::max(worst, slopes_[k + 1] - slopes_[k]);
  }
  return worst;
}

void ConcavePLFunction::clamp_concavity() {
  if (max_concavity_violation() <= 0.0) return;

  // Pool-adjacent-violators for a non-increasing sequence, weighted by
  // segment widths.
  struct Block {
    double mean;
    double weight;
    size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(slopes_.size());
  for (size_t k = 0; k < slopes_.size(); ++k) {
    const double w = ys_[k + 1] - ys_[k];
    blocks.push_back({slopes_[k], w, 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].mean < blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w_total = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w_total;
      prev.weight = w_total;
      prev.count += top.count;
    }
  }

  size_t k = 0;
  for (const Block& blk : blocks) {
    for (size_t i = 0; i < blk.count; ++i) slopes_[k++] = blk.mean;
  }
  for (size_t j = 0; j + 1 < ys_.size(); ++j) {
    vals_[j + 1] = vals_[j] + slopes_[j] * (ys_[j + 1] - ys_[j]);
  }
}

}  // namespace nemco

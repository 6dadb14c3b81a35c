#pragma once

#include <stdexcept>
#include <vector>

namespace dcd {

/// Piecewise-linear function on [front knot, back knot], evaluated by linear
/// interpolation and clamped to the end values outside the knot range.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size() || xs_.size() < 2)
      throw std::invalid_argument("PiecewiseLinear: needs >= 2 knots");
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(xs_[i] > xs_[i - 1]))
        throw std::invalid_argument("PiecewiseLinear: knots must increase");
    }
  }

  static PiecewiseLinear identity() { return PiecewiseLinear({0.0, 1.0}, {0.0, 1.0}); }

  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    std::size_t hi = 1;
    while (xs_[hi] < x) ++hi;
    const double t = (x - xs_[hi - 1]) / (xs_[hi] - xs_[hi - 1]);
    return ys_[hi - 1] + t * (ys_[hi] - ys_[hi - 1]);
  }

  bool non_decreasing() const {
    for (std::size_t i = 1; i < ys_.size(); ++i)
      if (ys_[i] < ys_[i - 1]) return false;
    return true;
  }

  bool non_increasing() const {
    for (std::size_t i = 1; i < ys_.size(); ++i)
      if (ys_[i] > ys_[i - 1]) return false;
    return true;
  }

  const std::vector<double>& knots() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }

  /// For a CDF curve: smallest x with value >= u (left edge on flat runs).
  double inverse(double u) const {
    if (u <= ys_.front()) return xs_.front();
    if (u >= ys_.back()) return xs_.back();
    std::size_t hi = 1;
    while (ys_[hi] < u) ++hi;
    const double dy = ys_[hi] - ys_[hi - 1];
    if (dy <= 0.0) return xs_[hi - 1];
    const double t = (u - ys_[hi - 1]) / dy;
    return xs_[hi - 1] + t * (xs_[hi] - xs_[hi - 1]);
  }

 private:
  std::vector<double> xs_, ys_;
};

}  // namespace dcd

#pragma once

#include <utility>
#include <vector>

namespace netlife {

// Concave, non-decreasing piecewise-linear function given by breakpoints
// (x_0, v_0), ..., (x_K, v_K) with x_0 = 0. Beyond x_K the last segment's
// slope extends. A single breakpoint means a constant function.
class PiecewiseLinearConcave {
 public:
  PiecewiseLinearConcave() = default;
  explicit PiecewiseLinearConcave(std::vector<std::pair<double, double>> pts);

  // Linear convenience: value(x) = slope * x on [0, x_max].
  static PiecewiseLinearConcave linear(double slope, double x_max);
  static PiecewiseLinearConcave constant(double value);

  // Throws ConfigError if breakpoints are not strictly increasing in x,
  // x_0 != 0, any slope is negative, or slopes increase.
  void validate() const;

  double eval(double x) const;
  double slope_at_zero() const;

  // Largest attainable value on [0, x_cap].
  double max_on(double x_cap) const { return eval(x_cap); }

  // Returns a copy with all values scaled by factor >= 0 (used for the
  // multiplicative utility-noise model; concavity is preserved).
  PiecewiseLinearConcave scaled(double factor) const;

  bool is_constant() const { return pts_.size() <= 1; }
  // True if a single segment describes the whole function (fast path: the
  // objective can absorb the slope with no epigraph variable).
  bool is_single_segment() const { return pts_.size() <= 2; }

  const std::vector<std::pair<double, double>>& breakpoints() const {
    return pts_;
  }

 private:
  std::vector<std::pair<double, double>> pts_;
};

}  // namespace netlife

#include "netlife/pwl.hpp"

#include <cmath>
#include <limits>

#include "netlife/errors.hpp"

namespace netlife {

PiecewiseLinearConcave::PiecewiseLinearConcave(
    std::vector<std::pair<double, double>> pts)
    : pts_(std::move(pts)) {
  validate();
}

PiecewiseLinearConcave PiecewiseLinearConcave::linear(double slope,
                                                      double x_max) {
  if (slope == 0.0 || x_max <= 0.0) return constant(0.0);
  return PiecewiseLinearConcave({{0.0, 0.0}, {x_max, slope * x_max}});
}

PiecewiseLinearConcave PiecewiseLinearConcave::constant(double value) {
  return PiecewiseLinearConcave({{0.0, value}});
}

void PiecewiseLinearConcave::validate() const {
  if (pts_.empty()) throw ConfigError("utility: no breakpoints");
  if (pts_.front().first != 0.0)
    throw ConfigError("utility: first breakpoint must be at x = 0");
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < pts_.size(); ++k) {
    const double dx = pts_[k].first - pts_[k - 1].first;
    if (dx <= 0.0)
      throw ConfigError("utility: breakpoints not strictly increasing");
    const double slope = (pts_[k].second - pts_[k - 1].second) / dx;
    if (slope < -1e-12) throw ConfigError("utility: decreasing segment");
    if (slope > prev_slope + 1e-12 * (1.0 + std::fabs(prev_slope)))
      throw ConfigError("utility: slopes increase (not concave)");
    prev_slope = slope;
  }
}

double PiecewiseLinearConcave::eval(double x) const {
  if (pts_.size() == 1) return pts_.front().second;
  std::size_t k = 1;
  while (k + 1 < pts_.size() && x > pts_[k].first) ++k;
  const double dx = pts_[k].first - pts_[k - 1].first;
  const double slope = (pts_[k].second - pts_[k - 1].second) / dx;
  return pts_[k - 1].second + slope * (x - pts_[k - 1].first);
}

double PiecewiseLinearConcave::slope_at_zero() const {
  if (pts_.size() == 1) return 0.0;
  return (pts_[1].second - pts_[0].second) / (pts_[1].first - pts_[0].first);
}

PiecewiseLinearConcave PiecewiseLinearConcave::scaled(double factor) const {
  std::vector<std::pair<double, double>> pts = pts_;
  for (auto& p : pts) p.second *= factor;
  PiecewiseLinearConcave out;
  out.pts_ = std::move(pts);
  return out;
}

}  // namespace netlife

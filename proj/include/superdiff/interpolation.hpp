#pragma once

#include <span>
#include <vector>

namespace superdiff {

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
/// Evaluation clamps to the end values outside [x_0, x_n].
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  std::span<const double> knots() const { return x_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives
};

}  // namespace superdiff

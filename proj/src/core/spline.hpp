#pragma once

#include <vector>

#include "dual.hpp"

namespace jbf {

// Cubic interpolating spline with not-a-knot end conditions.  Evaluation
// returns the value with analytic first and second derivatives.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> knots, std::vector<double> values);

  Jet2 operator()(double x) const;

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  bool in_support(double x) const { return x >= lo() && x <= hi(); }

 private:
  std::vector<double> x_, y_, c_;  // c_: second derivatives at knots
};

}  // namespace jbf

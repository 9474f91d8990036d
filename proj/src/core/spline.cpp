#include "spline.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace jbf {

namespace {

// Thomas algorithm; diagonals (a: sub, b: main, c: super), rhs d.
std::vector<double> solve_tridiag(std::vector<double> a, std::vector<double> b,
                                  std::vector<double> c, std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
    : x_(std::move(knots)), y_(std::move(values)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw InputError("spline needs >= 2 knots");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw InputError("spline knots must be increasing");

  c_.assign(n, 0.0);
  if (n == 2) return;

  auto h = [&](std::size_t i) { return x_[i + 1] - x_[i]; };
  auto slope = [&](std::size_t i) { return (y_[i + 1] - y_[i]) / h(i); };

  if (n == 3) {
    // single interior equation with natural ends
    const double rhs = slope(1) - slope(0);
    c_[1] = rhs / ((h(0) + h(1)) / 3.0);
    return;
  }

  // Interior unknowns M_1..M_{n-2}; not-a-knot eliminates M_0 and M_{n-1}:
  //   M_0 = M_1 (1 + h0/h1) - M_2 h0/h1,  symmetrically at the right end.
  const std::size_t m = n - 2;
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t r = i - 1;
    sub[r] = h(i - 1) / 6.0;
    diag[r] = (h(i - 1) + h(i)) / 3.0;
    sup[r] = h(i) / 6.0;
    rhs[r] = slope(i) - slope(i - 1);
  }
  {
    const double r0 = h(0) / h(1);
    diag[0] += sub[0] * (1.0 + r0);
    sup[0] -= sub[0] * r0;
    sub[0] = 0.0;
  }
  {
    const double r1 = h(n - 2) / h(n - 3);
    diag[m - 1] += sup[m - 1] * (1.0 + r1);
    sub[m - 1] -= sup[m - 1] * r1;
    sup[m - 1] = 0.0;
  }
  std::vector<double> mm = solve_tridiag(sub, diag, sup, rhs);
  for (std::size_t i = 0; i < m; ++i) c_[i + 1] = mm[i];
  c_[0] = c_[1] * (1.0 + h(0) / h(1)) - c_[2] * (h(0) / h(1));
  c_[n - 1] = c_[n - 2] * (1.0 + h(n - 2) / h(n - 3)) - c_[n - 3] * (h(n - 2) / h(n - 3));
}

Jet2 CubicSpline::operator()(double x) const {
  const std::size_t n = x_.size();
  if (x < x_.front() || x > x_.back())
    throw DomainError("spline evaluated outside its support");
  std::size_t i =
      static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1) - 1;

  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - x) / h;
  const double B = (x - x_[i]) / h;
  const double v = A * y_[i] + B * y_[i + 1] +
                   ((A * A * A - A) * c_[i] + (B * B * B - B) * c_[i + 1]) * h * h / 6.0;
  const double d = (y_[i + 1] - y_[i]) / h +
                   h / 6.0 * (-(3.0 * A * A - 1.0) * c_[i] + (3.0 * B * B - 1.0) * c_[i + 1]);
  const double dd = A * c_[i] + B * c_[i + 1];
  return {v, d, dd};
}

}  // namespace jbf

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

// Forward-mode differentiation scalars.
//
// Jet1 carries one directional derivative, Jet2 additionally the second
// derivative along the same direction.  Grad carries a full gradient with a
// runtime number of directions; it is what propagates through the
// Faddeev-LeVerrier recursion and through field gradients.

namespace jbf {

struct Jet1 {
  double v = 0.0;
  double d = 0.0;

  Jet1() = default;
  Jet1(double value) : v(value) {}
  Jet1(double value, double deriv) : v(value), d(deriv) {}
};

inline Jet1 operator+(Jet1 a, Jet1 b) { return {a.v + b.v, a.d + b.d}; }
inline Jet1 operator-(Jet1 a, Jet1 b) { return {a.v - b.v, a.d - b.d}; }
inline Jet1 operator-(Jet1 a) { return {-a.v, -a.d}; }
inline Jet1 operator*(Jet1 a, Jet1 b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Jet1 operator/(Jet1 a, Jet1 b) {
  if (b.v == 0.0) throw DomainError("division by zero");
  const double q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}

inline Jet1 exp(Jet1 a) { const double e = std::exp(a.v); return {e, e * a.d}; }
inline Jet1 log(Jet1 a) {
  if (a.v <= 0.0) throw DomainError("log of non-positive value");
  return {std::log(a.v), a.d / a.v};
}
inline Jet1 sin(Jet1 a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Jet1 cos(Jet1 a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Jet1 sqrt(Jet1 a) {
  if (a.v < 0.0) throw DomainError("sqrt of negative value");
  if (a.v == 0.0 && a.d != 0.0) throw DomainError("sqrt not differentiable at 0");
  const double r = std::sqrt(a.v);
  return {r, r == 0.0 ? 0.0 : a.d / (2.0 * r)};
}
inline Jet1 tanh(Jet1 a) {
  const double th = std::tanh(a.v);
  return {th, (1.0 - th * th) * a.d};
}

struct Jet2 {
  double v = 0.0;
  double d = 0.0;
  double dd = 0.0;

  Jet2() = default;
  Jet2(double value) : v(value) {}
  Jet2(double value, double deriv, double deriv2 = 0.0) : v(value), d(deriv), dd(deriv2) {}

  Jet1 jet1() const { return {v, d}; }
  // First derivative as a Jet1 in the same direction.
  Jet1 deriv_jet1() const { return {d, dd}; }
};

inline Jet2 operator+(Jet2 a, Jet2 b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet2 operator-(Jet2 a, Jet2 b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet2 operator-(Jet2 a) { return {-a.v, -a.d, -a.dd}; }
inline Jet2 operator*(Jet2 a, Jet2 b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
inline Jet2 operator/(Jet2 a, Jet2 b) {
  if (b.v == 0.0) throw DomainError("division by zero");
  const double q = a.v / b.v;
  const double qd = (a.d - q * b.d) / b.v;
  return {q, qd, (a.dd - 2.0 * qd * b.d - q * b.dd) / b.v};
}

// f(a) with chain rule: f(a).dd = f''(a.v) a.d^2 + f'(a.v) a.dd
inline Jet2 compose(double f, double f1, double f2, Jet2 a) {
  return {f, f1 * a.d, f2 * a.d * a.d + f1 * a.dd};
}

inline Jet2 exp(Jet2 a) { const double e = std::exp(a.v); return compose(e, e, e, a); }
inline Jet2 log(Jet2 a) {
  if (a.v <= 0.0) throw DomainError("log of non-positive value");
  return compose(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v), a);
}
inline Jet2 sin(Jet2 a) { return compose(std::sin(a.v), std::cos(a.v), -std::sin(a.v), a); }
inline Jet2 cos(Jet2 a) { return compose(std::cos(a.v), -std::sin(a.v), -std::cos(a.v), a); }
inline Jet2 sqrt(Jet2 a) {
  if (a.v < 0.0) throw DomainError("sqrt of negative value");
  if (a.v == 0.0 && (a.d != 0.0 || a.dd != 0.0))
    throw DomainError("sqrt not differentiable at 0");
  const double r = std::sqrt(a.v);
  if (r == 0.0) return {0.0, 0.0, 0.0};
  return compose(r, 0.5 / r, -0.25 / (r * a.v), a);
}
inline Jet2 tanh(Jet2 a) {
  const double th = std::tanh(a.v);
  const double s = 1.0 - th * th;
  return compose(th, s, -2.0 * th * s, a);
}

// Value plus gradient with a runtime direction count.
struct Grad {
  double v = 0.0;
  std::vector<double> g;

  Grad() = default;
  explicit Grad(double value, std::size_t dirs = 0) : v(value), g(dirs, 0.0) {}
  Grad(double value, std::vector<double> grad) : v(value), g(std::move(grad)) {}

  static Grad seeded(double value, std::size_t dirs, std::size_t dir) {
    Grad r(value, dirs);
    r.g[dir] = 1.0;
    return r;
  }
};

namespace detail {
inline void resize_like(Grad& a, const Grad& b) {
  if (a.g.size() < b.g.size()) a.g.resize(b.g.size(), 0.0);
}
}  // namespace detail

inline Grad operator+(Grad a, const Grad& b) {
  detail::resize_like(a, b);
  a.v += b.v;
  for (std::size_t i = 0; i < b.g.size(); ++i) a.g[i] += b.g[i];
  return a;
}
inline Grad operator-(Grad a, const Grad& b) {
  detail::resize_like(a, b);
  a.v -= b.v;
  for (std::size_t i = 0; i < b.g.size(); ++i) a.g[i] -= b.g[i];
  return a;
}
inline Grad operator-(Grad a) {
  a.v = -a.v;
  for (auto& x : a.g) x = -x;
  return a;
}
inline Grad operator*(const Grad& a, const Grad& b) {
  Grad r(a.v * b.v, std::max(a.g.size(), b.g.size()));
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] += a.g[i] * b.v;
  for (std::size_t i = 0; i < b.g.size(); ++i) r.g[i] += a.v * b.g[i];
  return r;
}
inline Grad operator/(const Grad& a, const Grad& b) {
  if (b.v == 0.0) throw DomainError("division by zero");
  Grad r(a.v / b.v, std::max(a.g.size(), b.g.size()));
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] += a.g[i] / b.v;
  for (std::size_t i = 0; i < b.g.size(); ++i) r.g[i] -= (a.v / b.v) * b.g[i] / b.v;
  return r;
}

inline Grad apply(double f, double f1, const Grad& a) {
  Grad r(f, a.g.size());
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] = f1 * a.g[i];
  return r;
}

inline Grad exp(const Grad& a) { const double e = std::exp(a.v); return apply(e, e, a); }
inline Grad log(const Grad& a) {
  if (a.v <= 0.0) throw DomainError("log of non-positive value");
  return apply(std::log(a.v), 1.0 / a.v, a);
}
inline Grad sin(const Grad& a) { return apply(std::sin(a.v), std::cos(a.v), a); }
inline Grad cos(const Grad& a) { return apply(std::cos(a.v), -std::sin(a.v), a); }
inline Grad sqrt(const Grad& a) {
  if (a.v < 0.0) throw DomainError("sqrt of negative value");
  const double r = std::sqrt(a.v);
  if (r == 0.0) {
    for (double gi : a.g)
      if (gi != 0.0) throw DomainError("sqrt not differentiable at 0");
    return Grad(0.0, a.g.size());
  }
  return apply(r, 0.5 / r, a);
}
inline Grad tanh(const Grad& a) {
  const double th = std::tanh(a.v);
  return apply(th, 1.0 - th * th, a);
}

// Scalar access shared by double and the jet types, used by generic code
// that needs the plain value (domain checks, comparisons).
inline double value_of(double x) { return x; }
inline double value_of(Jet1 x) { return x.v; }
inline double value_of(Jet2 x) { return x.v; }
inline double value_of(const Grad& x) { return x.v; }

}  // namespace jbf

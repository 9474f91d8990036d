#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "expr.hpp"

namespace jbf {

// Evaluation point.  `s` is the characteristic variable used by initial-data
// fields; PDE-side fields ignore it.
struct Point {
  double t = 0.0;
  double x = 0.0;
  double s = 0.0;
  std::vector<double> u;
};

struct Gradient {
  double dt = 0.0;
  double dx = 0.0;
  double ds = 0.0;
  std::vector<double> du;
};

class FieldImpl {
 public:
  virtual ~FieldImpl() = default;
  virtual int arity() const = 0;
  virtual double eval(const Point& p) const = 0;
  virtual Gradient grad(const Point& p) const = 0;
  virtual std::string describe() const = 0;
};

// Expression-backed scalar field with exact derivatives by dual propagation.
class ExprField final : public FieldImpl {
 public:
  ExprField(std::string source, int arity,
            const std::map<std::string, double>& constants = {});

  int arity() const override { return arity_; }
  double eval(const Point& p) const override;
  Gradient grad(const Point& p) const override;
  std::string describe() const override { return expr::print(*ast_); }

  const std::string& source() const { return source_; }
  const expr::UsedVars& free_vars() const { return vars_; }

  template <class T>
  T eval_env(const expr::Env<T>& env) const {
    return expr::eval(*ast_, env, source_);
  }

 private:
  std::string source_;
  int arity_;
  expr::NodePtr ast_;
  expr::UsedVars vars_;
};

// Value-semantics handle over an immutable field implementation.
class Field {
 public:
  Field() = default;
  explicit Field(std::shared_ptr<const FieldImpl> impl) : impl_(std::move(impl)) {}

  static Field parse(const std::string& src, int arity,
                     const std::map<std::string, double>& constants = {});

  bool valid() const { return impl_ != nullptr; }
  int arity() const { return impl_->arity(); }
  double eval(const Point& p) const { return impl_->eval(p); }
  Gradient grad(const Point& p) const { return impl_->grad(p); }
  std::string describe() const { return impl_->describe(); }

  const ExprField* as_expr() const {
    return dynamic_cast<const ExprField*>(impl_.get());
  }

  // Value and u-gradient packed as a Grad scalar (directions = u-components).
  Grad eval_ugrad(const Point& p) const;

 private:
  std::shared_ptr<const FieldImpl> impl_;
};

// Adaptive Simpson quadrature, absolute tolerance with recursion depth cap.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_depth = 40);

// Integral of `f` along the u1 direction with the other coordinates frozen.
double integrate_u1(const Field& f, const Point& p, double a, double b,
                    double tol = 1e-12);

}  // namespace jbf

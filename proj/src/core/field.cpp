#include "field.hpp"

#include <cmath>

namespace jbf {

ExprField::ExprField(std::string source, int arity,
                     const std::map<std::string, double>& constants)
    : source_(std::move(source)), arity_(arity) {
  ast_ = expr::parse(source_, arity_, constants);
  vars_ = expr::used_vars(*ast_, arity_);
}

static void check_arity(int arity, const Point& p) {
  if (static_cast<int>(p.u.size()) != arity)
    throw InputError("point has " + std::to_string(p.u.size()) +
                     " u-components, field arity is " + std::to_string(arity));
}

double ExprField::eval(const Point& p) const {
  check_arity(arity_, p);
  expr::Env<double> env{p.t, p.x, p.s, p.u};
  return eval_env(env);
}

Gradient ExprField::grad(const Point& p) const {
  check_arity(arity_, p);
  const std::size_t n = p.u.size();
  const std::size_t dirs = n + 3;  // t, x, s, u1..un
  expr::Env<Grad> env;
  env.t = Grad::seeded(p.t, dirs, 0);
  env.x = Grad::seeded(p.x, dirs, 1);
  env.s = Grad::seeded(p.s, dirs, 2);
  env.u.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    env.u.push_back(Grad::seeded(p.u[i], dirs, 3 + i));
  Grad r = eval_env(env);
  r.g.resize(dirs, 0.0);
  Gradient out;
  out.dt = r.g[0];
  out.dx = r.g[1];
  out.ds = r.g[2];
  out.du.assign(r.g.begin() + 3, r.g.end());
  return out;
}

Field Field::parse(const std::string& src, int arity,
                   const std::map<std::string, double>& constants) {
  return Field(std::make_shared<ExprField>(src, arity, constants));
}

Grad Field::eval_ugrad(const Point& p) const {
  Gradient g = grad(p);
  return Grad(eval(p), std::move(g.du));
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double m, double fm, double whole,
             double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth <= 0)
    throw DomainError("quadrature did not converge (singular integrand?)");
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double integrate_u1(const Field& f, const Point& p, double a, double b,
                    double tol) {
  Point q = p;
  auto integrand = [&](double xi) {
    q.u[0] = xi;
    return f.eval(q);
  };
  if (q.u.empty()) throw InputError("integrate_u1 requires arity >= 1");
  return integrate(integrand, a, b, tol);
}

}  // namespace jbf

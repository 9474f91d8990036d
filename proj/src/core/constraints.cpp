#include "constraints.hpp"

#include <cmath>

namespace jbf {

namespace {

void require_2x2(const JordanSystem& sys) {
  if (sys.block_count() != 1 || sys.n() != 2)
    throw InputError("operation requires a single 2x2 Toeplitz block");
}

// phi(u1,u2) = f1(u2) exp(int_{ref}^{u1} lambda_{u2}/mu d xi)
class QuadraturePhi final : public FieldImpl {
 public:
  QuadraturePhi(Field lambda, Field mu, Field f1, double u1_ref)
      : lambda_(std::move(lambda)), mu_(std::move(mu)), f1_(std::move(f1)),
        u1_ref_(u1_ref) {}

  int arity() const override { return 2; }

  double eval(const Point& p) const override {
    return f1_.eval(p) * std::exp(exponent(p.u[0], p.u[1]));
  }

  Gradient grad(const Point& p) const override {
    const double u1 = p.u[0], u2 = p.u[1];
    const double phi = eval(p);
    Gradient out;
    out.du.assign(2, 0.0);
    out.du[0] = phi * integrand(u1, u2);
    // u2-derivative by centered difference of the quadrature-backed value.
    const double h = 1e-6;
    Point q = p;
    q.u[1] = u2 + h;
    const double plus = eval(q);
    q.u[1] = u2 - h;
    const double minus = eval(q);
    out.du[1] = (plus - minus) / (2.0 * h);
    return out;
  }

  std::string describe() const override {
    return "f1(u2)*exp(int(lambda_u2/mu, u1_ref.." + std::to_string(u1_ref_) + "))";
  }

 private:
  double integrand(double xi, double u2) const {
    Point q;
    q.u = {xi, u2};
    const double mu = mu_.eval(q);
    if (mu == 0.0) throw DomainError("mu vanishes on the integration path");
    return lambda_.grad(q).du[1] / mu;
  }

  double exponent(double u1, double u2) const {
    return integrate([&](double xi) { return integrand(xi, u2); }, u1_ref_, u1);
  }

  Field lambda_, mu_, f1_;
  double u1_ref_;
};

}  // namespace

std::pair<double, double> compat_residual_2x2(const JordanSystem& sys,
                                              const Field& phi, const Point& p) {
  require_2x2(sys);
  const Field& lambda = sys.block(0).entries[0];
  const Field& mu = sys.block(0).entries[1];

  const Gradient gl = lambda.grad(p);
  const double lam = lambda.eval(p);
  const double muv = mu.eval(p);
  const double phiv = phi.eval(p);
  const Gradient gp = phi.grad(p);

  const double r_a = gl.du[0];
  const double r_b = gl.du[1] * phiv * phiv + lam * gp.dx - gp.dt -
                     muv * phiv * gp.du[0];
  return {r_a, r_b};
}

Field phi_closed_form_2x2(const JordanSystem& sys, const Field& f1,
                          double u1_ref,
                          const std::vector<std::vector<double>>& probe_points) {
  require_2x2(sys);
  const Field& lambda = sys.block(0).entries[0];
  const Field& mu = sys.block(0).entries[1];

  std::vector<std::vector<double>> probes = probe_points;
  if (probes.empty())
    for (double a : {0.5, 1.25, 2.0})
      for (double b : {0.5, 1.25, 2.0}) probes.push_back({a, b});
  for (const auto& u : probes) {
    Point q;
    q.u = u;
    double dl;
    try {
      dl = lambda.grad(q).du[0];
    } catch (const DomainError&) {
      continue;  // probe outside the entry's domain
    }
    if (std::abs(dl) > 1e-8)
      throw PreconditionError(
          "system is not linearly degenerate: d lambda/d u1 = " +
          std::to_string(dl) + " at a probe point");
  }

  return Field(std::make_shared<QuadraturePhi>(lambda, mu, f1, u1_ref));
}

std::vector<double> compat_residual_two_block(const JordanSystem& sys,
                                              const Field& phi1,
                                              const Field& phi2, const Point& p) {
  if (sys.block_count() != 2)
    throw InputError("operation requires exactly two blocks");
  const int k = sys.block(0).size;
  const int m = sys.block(1).size;
  const int off2 = sys.block_offset(1);

  // lambda values and u-gradients per block entry
  auto lam = [&](int block, int l) {  // l is 1-based
    return sys.block(static_cast<std::size_t>(block))
        .entries[static_cast<std::size_t>(l - 1)];
  };
  auto gidx = [&](int block, int j) {  // 1-based local -> 0-based global
    return static_cast<std::size_t>((block == 0 ? 0 : off2) + j - 1);
  };

  const Gradient g_l1 = lam(0, 1).grad(p);
  const Gradient g_l2 = lam(1, 1).grad(p);
  const double l1 = lam(0, 1).eval(p);
  const double l2 = lam(1, 1).eval(p);

  const double p1 = phi1.eval(p), p2 = phi2.eval(p);
  const Gradient g_p1 = phi1.grad(p), g_p2 = phi2.grad(p);

  std::vector<double> out;
  out.push_back(g_l1.du[gidx(0, 1)]);
  out.push_back(g_l2.du[gidx(1, 1)]);

  // d(lambda_a^1 phi)/du at global index g
  auto dprod = [&](const Gradient& glam, double lamv, const Gradient& gphi,
                   double phiv, std::size_t g) {
    return glam.du[g] * phiv + lamv * gphi.du[g];
  };

  // interior conditions of one constraint against one block's variables
  auto convolution = [&](const Gradient& gphi, int block, int j) {
    double s = 0.0;
    for (int l = 1; l <= j; ++l)
      s += gphi.du[gidx(block, j - l + 1)] *
           lam(block, l).eval(p);
    return s;
  };

  for (int j = 2; j <= k - 1; ++j)
    out.push_back(convolution(g_p1, 0, j) - dprod(g_l1, l1, g_p1, p1, gidx(0, j)));
  for (int s = 1; s <= m - 1; ++s)
    out.push_back(convolution(g_p1, 1, s) - dprod(g_l1, l1, g_p1, p1, gidx(1, s)));
  out.push_back(g_p1.dt + convolution(g_p1, 0, k) * p1 + convolution(g_p1, 1, m) * p2 -
                p1 * dprod(g_l1, l1, g_p1, p1, gidx(0, k)) -
                p2 * dprod(g_l1, l1, g_p1, p1, gidx(1, m)) - l1 * g_p1.dx);

  for (int j = 2; j <= k - 1; ++j)
    out.push_back(convolution(g_p2, 0, j) - dprod(g_l2, l2, g_p2, p2, gidx(0, j)));
  for (int s = 1; s <= m - 1; ++s)
    out.push_back(convolution(g_p2, 1, s) - dprod(g_l2, l2, g_p2, p2, gidx(1, s)));
  out.push_back(g_p2.dt + convolution(g_p2, 0, k) * p1 + convolution(g_p2, 1, m) * p2 -
                p1 * dprod(g_l2, l2, g_p2, p2, gidx(0, k)) -
                p2 * dprod(g_l2, l2, g_p2, p2, gidx(1, m)) - l2 * g_p2.dx);
  return out;
}

namespace {

// f / (lambda^2 - lambda^1) with a guard on coalescing speeds.
class SpeedGapRatio final : public FieldImpl {
 public:
  SpeedGapRatio(Field f, Field lam1, Field lam2)
      : f_(std::move(f)), lam1_(std::move(lam1)), lam2_(std::move(lam2)) {}

  int arity() const override { return f_.arity(); }

  double eval(const Point& p) const override {
    return f_.eval(p) / gap(p);
  }

  Gradient grad(const Point& p) const override {
    const double d = gap(p);
    const double fv = f_.eval(p);
    const Gradient gf = f_.grad(p);
    const Gradient g1 = lam1_.grad(p);
    const Gradient g2 = lam2_.grad(p);
    Gradient out;
    auto q = [&](double df, double dgap) { return (df * d - fv * dgap) / (d * d); };
    out.dt = q(gf.dt, g2.dt - g1.dt);
    out.dx = q(gf.dx, g2.dx - g1.dx);
    out.ds = q(gf.ds, g2.ds - g1.ds);
    out.du.resize(gf.du.size());
    for (std::size_t i = 0; i < gf.du.size(); ++i)
      out.du[i] = q(gf.du[i], g2.du[i] - g1.du[i]);
    return out;
  }

  std::string describe() const override {
    return "(" + f_.describe() + ")/(lambda2-lambda1)";
  }

 private:
  double gap(const Point& p) const {
    const double d = lam2_.eval(p) - lam1_.eval(p);
    if (std::abs(d) < 1e-10)
      throw DomainError("coalescing characteristic speeds (lambda2 = lambda1)");
    return d;
  }

  Field f_, lam1_, lam2_;
};

}  // namespace

HardRodConstraint hardrod_phi(const Field& f1, const Field& f2, const Field& f3,
                              const JordanSystem& sys) {
  if (sys.block_count() != 2)
    throw InputError("hardrod_phi requires a two-block system");
  const Field& lam1 = sys.block(0).entries[0];
  const Field& lam2 = sys.block(1).entries[0];
  auto ratio = [&](const Field& f) {
    return Field(std::make_shared<SpeedGapRatio>(f, lam1, lam2));
  };
  return {ratio(f1), ratio(f2), ratio(f3)};
}

std::array<double, 3> hardrod_f_residual(const Field& f1, const Field& f2,
                                         const Field& f3, const Point& p,
                                         double a) {
  const double u1 = p.u.at(0), u2 = p.u.at(1), u3 = p.u.at(2), u4 = p.u.at(3);
  const double w = u2 - u4;
  if (std::abs(w) < 1e-10) throw DomainError("singular locus u2 = u4");

  const double v1 = f1.eval(p), v2 = f2.eval(p), v3 = f3.eval(p);
  const Gradient g1 = f1.grad(p), g2 = f2.grad(p), g3 = f3.grad(p);

  const double r1 = (u1 + a) * g1.du[0] * v1 + v1 * v1 + w * g1.du[3] * v2 + v1 * v2;
  const double r2 = (u3 + a) * g2.du[2] * v2 + v2 * v2 - w * g2.du[1] * v1 + v2 * v1;
  const double bracket = w * g2.du[1] * v1 - v2 * v1 + w * g2.du[3] * v2 + v2 * v2;
  const double r3 = (u3 + a) * (v2 * g3.du[2] - v3 * g2.du[2]) - w * g3.du[1] * v1 +
                    v3 * v1 - (u3 + a) / w * bracket;
  return {r1, r2, r3};
}

}  // namespace jbf

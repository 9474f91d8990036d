#include "solutions.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace jbf {

namespace {

constexpr double kSigmaTol = 1e-12;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Canonical2: return "canonical2";
    case Family::WdvvT: return "wdvv-t";
    case Family::WdvvS: return "wdvv-s";
    case Family::HardRod1: return "hardrod1";
    case Family::HardRod2: return "hardrod2";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "canonical2") return Family::Canonical2;
  if (name == "wdvv-t") return Family::WdvvT;
  if (name == "wdvv-s") return Family::WdvvS;
  if (name == "hardrod1") return Family::HardRod1;
  if (name == "hardrod2") return Family::HardRod2;
  throw InputError("unknown family '" + name + "'");
}

std::string status_name(PointStatus s) {
  switch (s) {
    case PointStatus::Ok: return "ok";
    case PointStatus::Broken: return "broken";
    case PointStatus::OutOfSupport: return "out-of-support";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// DataFn

DataFn DataFn::from_expr(const std::string& src,
                         const std::map<std::string, double>& constants) {
  DataFn d;
  d.expr_ = std::make_shared<ExprField>(src, 0, constants);
  const auto& vars = d.expr_->free_vars();
  if (vars.t || vars.x)
    throw InputError("initial datum '" + src + "' may depend on s only");
  return d;
}

DataFn DataFn::from_spline(CubicSpline sp) {
  DataFn d;
  d.spline_ = std::move(sp);
  return d;
}

Jet2 DataFn::operator()(double sigma) const {
  if (spline_) return (*spline_)(sigma);
  if (!expr_) throw InputError("uninitialized initial datum");
  expr::Env<Jet2> env;
  env.s = Jet2(sigma, 1.0);
  return expr_->eval_env(env);
}

double DataFn::support_lo() const { return spline_ ? spline_->lo() : -1e300; }
double DataFn::support_hi() const { return spline_ ? spline_->hi() : 1e300; }

std::string DataFn::describe() const {
  if (spline_)
    return "spline[" + fmt17(spline_->lo()) + ", " + fmt17(spline_->hi()) + "]";
  return expr_ ? expr_->describe() : "<unset>";
}

// ---------------------------------------------------------------------------
// ParamFn

ParamFn ParamFn::from_expr(const std::string& src,
                           const std::map<std::string, double>& constants) {
  ParamFn f;
  f.arity_ = 8;
  f.expr_ = std::make_shared<ExprField>(src, f.arity_, constants);
  const auto& vars = f.expr_->free_vars();
  int count = 0;
  if (vars.t || vars.x)
    throw InputError("function parameter '" + src + "' may not depend on t or x");
  if (vars.s) {
    f.var_ = expr::VarKind::S;
    ++count;
  }
  for (int i = 0; i < f.arity_; ++i)
    if (vars.u[static_cast<std::size_t>(i)]) {
      f.var_ = expr::VarKind::U;
      f.uindex_ = i;
      ++count;
    }
  if (count > 1)
    throw InputError("function parameter '" + src +
                     "' must depend on a single variable");
  return f;
}

Jet2 ParamFn::operator()(Jet2 arg) const {
  if (!expr_) throw InputError("uninitialized function parameter");
  expr::Env<Jet2> env;
  env.u.assign(static_cast<std::size_t>(arity_), Jet2(0.0));
  const Jet2 seed(arg.v, 1.0);
  if (var_ == expr::VarKind::S)
    env.s = seed;
  else
    env.u[static_cast<std::size_t>(uindex_)] = seed;
  const Jet2 F = expr_->eval_env(env);  // (f, f', f'') at arg.v
  return compose(F.v, F.d, F.dd, arg);
}

Jet1 ParamFn::deriv(Jet2 arg) const {
  if (!expr_) throw InputError("uninitialized function parameter");
  expr::Env<Jet2> env;
  env.u.assign(static_cast<std::size_t>(arity_), Jet2(0.0));
  const Jet2 seed(arg.v, 1.0);
  if (var_ == expr::VarKind::S)
    env.s = seed;
  else
    env.u[static_cast<std::size_t>(uindex_)] = seed;
  const Jet2 F = expr_->eval_env(env);
  return {F.d, F.dd * arg.d};
}

std::string ParamFn::describe() const {
  return expr_ ? expr_->describe() : "<unset>";
}

// ---------------------------------------------------------------------------
// FamilyConfig

double FamilyConfig::param(const std::string& name) const {
  const auto it = params.find(name);
  if (it == params.end())
    throw InputError("missing parameter '" + name + "' for family " +
                     family_name(family));
  return it->second;
}

const DataFn& FamilyConfig::datum(const std::string& name) const {
  const auto it = data.find(name);
  if (it == data.end())
    throw InputError("missing initial datum '" + name + "' for family " +
                     family_name(family));
  return it->second;
}

FamilyConfig FamilyConfig::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid family JSON: ") + e.what());
  }
  try {
    FamilyConfig fc;
    fc.family = family_from_name(j.at("family").get<std::string>());
    if (j.contains("variant")) {
      const std::string v = j["variant"].get<std::string>();
      if (v == "paper")
        fc.variant = Variant::Paper;
      else if (v == "rederived")
        fc.variant = Variant::Rederived;
      else
        throw InputError("unknown variant '" + v + "'");
    }
    if (j.contains("params"))
      for (const auto& [key, val] : j["params"].items()) {
        if (val.is_number()) fc.params[key] = val.get<double>();
      }
    if (j.contains("params"))
      for (const auto& [key, val] : j["params"].items()) {
        if (!val.is_string()) continue;
        const std::string src = val.get<std::string>();
        if (key == "f1")
          fc.f1 = ParamFn::from_expr(src, fc.params);
        else if (key == "c1")
          fc.c1 = ParamFn::from_expr(src, fc.params);
        else
          throw InputError("unknown function parameter '" + key + "'");
      }
    if (j.contains("initial_data"))
      for (const auto& [key, val] : j["initial_data"].items()) {
        if (key == "closure") {
          ClosureSpec cs;
          const auto& c = val;
          for (const auto& p : c.at("produce")) cs.produce.push_back(p.get<std::string>());
          cs.sigma_lo = c.at("sigma_range").at(0).get<double>();
          cs.sigma_hi = c.at("sigma_range").at(1).get<double>();
          if (c.contains("step")) cs.step = c.at("step").get<double>();
          if (c.contains("anchors"))
            for (const auto& [ak, av] : c["anchors"].items()) {
              std::string name = ak;
              const auto paren = name.find('(');
              if (paren != std::string::npos) name = name.substr(0, paren);
              cs.anchors[name] = av.get<double>();
            }
          if (cs.sigma_hi <= cs.sigma_lo)
            throw InputError("closure sigma_range must be increasing");
          if (cs.step <= 0.0) throw InputError("closure step must be positive");
          fc.closure = cs;
        } else {
          fc.data[key] = DataFn::from_expr(val.get<std::string>(), fc.params);
        }
      }
    if (j.contains("support")) {
      fc.support_lo = j["support"].at(0).get<double>();
      fc.support_hi = j["support"].at(1).get<double>();
    }
    return fc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid family JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Closure integration

namespace {

using Rhs = std::function<std::vector<double>(double, const std::vector<double>&)>;

std::vector<double> rk4_step(const Rhs& f, double s, const std::vector<double>& y,
                             double h) {
  const std::size_t m = y.size();
  const auto k1 = f(s, y);
  std::vector<double> tmp(m);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  const auto k2 = f(s + 0.5 * h, tmp);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  const auto k3 = f(s + 0.5 * h, tmp);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
  const auto k4 = f(s + h, tmp);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Integrates y' = f over [lo, hi]; every accepted node is Richardson-checked
// against two half steps and the half-step result is kept.
struct OdeTable {
  std::vector<double> s;
  std::vector<std::vector<double>> y;  // y[i] = state at s[i]
  double max_local_error = 0.0;
};

OdeTable integrate_ode(const Rhs& f, double lo, double hi, double step,
                       std::vector<double> y0) {
  const int n = std::max(1, static_cast<int>(std::llround((hi - lo) / step)));
  const double h = (hi - lo) / n;
  OdeTable tab;
  tab.s.push_back(lo);
  tab.y.push_back(y0);
  std::vector<double> y = std::move(y0);
  for (int i = 0; i < n; ++i) {
    const double s = lo + i * h;
    const auto full = rk4_step(f, s, y, h);
    auto half = rk4_step(f, s, y, 0.5 * h);
    half = rk4_step(f, s + 0.5 * h, half, 0.5 * h);
    double err = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c)
      err = std::max(err, std::abs(full[c] - half[c]) / 15.0);
    if (err > 1e-8)
      throw DomainError("closure ODE local error " + std::to_string(err) +
                        " exceeds 1e-8 at sigma = " + std::to_string(s) +
                        "; reduce the step");
    tab.max_local_error = std::max(tab.max_local_error, err);
    y = std::move(half);
    tab.s.push_back(lo + (i + 1) * h);
    tab.y.push_back(y);
  }
  return tab;
}

std::set<std::string> expected_produce(Family fam) {
  switch (fam) {
    case Family::Canonical2: return {"u02"};
    case Family::WdvvT:
    case Family::WdvvS: return {"f1"};
    case Family::HardRod1: return {"u02", "u04"};
    case Family::HardRod2: return {"u02", "u03", "u04"};
  }
  return {};
}

}  // namespace

ClosureReport close_initial_data(FamilyConfig& fc) {
  if (!fc.closure)
    throw InputError("family configuration carries no closure block");
  const ClosureSpec& cs = *fc.closure;
  const std::set<std::string> want(cs.produce.begin(), cs.produce.end());
  if (want != expected_produce(fc.family))
    throw InputError("closure for " + family_name(fc.family) +
                     " must produce exactly the functions the family leaves free");

  ClosureReport rep;
  rep.produced.assign(want.begin(), want.end());

  // Pointwise families: f1 tabulated algebraically from the free data.
  if (fc.family == Family::WdvvT || fc.family == Family::WdvvS) {
    auto f1_value = [&](double s) {
      const Jet2 u01 = fc.datum("u01")(s);
      const Jet2 u03 = fc.datum("u03")(s);
      if (fc.family == Family::WdvvT) {
        if (fc.variant == Variant::Paper) {
          if (u01.v == 0.0) throw DomainError("closure requires u01 != 0");
          return u03.d / u01.v;
        }
        return u01.v * u03.d;
      }
      const Jet2 u02 = fc.datum("u02")(s);
      if (u02.v == 0.0) throw DomainError("closure requires u02 != 0");
      return u01.v / u02.v * u03.d;
    };
    const int n =
        std::max(1, static_cast<int>(std::llround((cs.sigma_hi - cs.sigma_lo) / cs.step)));
    const double h = (cs.sigma_hi - cs.sigma_lo) / n;
    std::vector<double> knots, vals;
    for (int i = 0; i <= n; ++i) {
      const double s = cs.sigma_lo + i * h;
      knots.push_back(s);
      vals.push_back(f1_value(s));
    }
    CubicSpline sp(knots, vals);
    for (int i = 0; i < n; ++i) {
      const double s = cs.sigma_lo + (i + 0.5) * h;
      rep.max_defining_residual =
          std::max(rep.max_defining_residual, std::abs(sp(s).v - f1_value(s)));
    }
    fc.f1_sigma = DataFn::from_spline(std::move(sp));
    return rep;
  }

  // ODE families.
  std::vector<std::string> order(expected_produce(fc.family).begin(),
                                 expected_produce(fc.family).end());
  std::vector<double> y0;
  for (const auto& name : order) {
    const auto it = cs.anchors.find(name);
    if (it == cs.anchors.end())
      throw InputError("closure anchor for '" + name + "' is required");
    y0.push_back(it->second);
  }

  Rhs rhs;
  if (fc.family == Family::Canonical2) {
    if (!fc.f1) throw InputError("canonical2 closure requires the function f1");
    rhs = [&fc](double s, const std::vector<double>& y) {
      const Jet2 u01 = fc.datum("u01")(s);
      const Jet2 f = (*fc.f1)(Jet2(y[0]));
      return std::vector<double>{f.v * std::exp(u01.v)};
    };
  } else if (fc.family == Family::HardRod1) {
    if (!fc.c1) throw InputError("hardrod1 closure requires the function c1");
    const double a = fc.param("a"), k = fc.param("k"), h = fc.param("h");
    const bool paper = fc.variant == Variant::Paper;
    rhs = [&fc, a, k, h, paper](double s, const std::vector<double>& y) {
      const double u01 = fc.datum("u01")(s).v;
      const double den = h * u01 - a * a;
      if (std::abs(den) < 1e-12)
        throw DomainError("closure ODE singularity h*u01 = a^2");
      const double c = (*fc.c1)(Jet2(y[0])).v;
      const double k1 = paper ? u01 : h;
      return std::vector<double>{c * (a + k1) / den, -k * (u01 + a) / den};
    };
  } else {  // HardRod2
    if (!fc.c1) throw InputError("hardrod2 closure requires the function c1");
    const double a = fc.param("a"), k = fc.param("k");
    rhs = [&fc, a, k](double s, const std::vector<double>& y) {
      const double u01 = fc.datum("u01")(s).v;
      const double u02 = y[0], u03 = y[1], u04 = y[2];
      const double den = u01 * u03 - a * a;
      if (std::abs(den) < 1e-12)
        throw DomainError("closure ODE singularity u01*u03 = a^2");
      const double w0 = u02 - u04;
      const Jet2 c = (*fc.c1)(Jet2(u02));
      const Jet1 cp = fc.c1->deriv(Jet2(u02));
      const double den1 = c.v + cp.v * w0;
      if (std::abs(den1) < 1e-12)
        throw DomainError("closure ODE singularity c1 + c1' (u02-u04) = 0");
      const double common = (u01 + a) * (u03 + a) / den;
      return std::vector<double>{c.v * c.v * common * w0 / den1, k * common,
                                 c.v * common * w0};
    };
  }

  const OdeTable tab = integrate_ode(rhs, cs.sigma_lo, cs.sigma_hi, cs.step, y0);
  rep.max_local_error = tab.max_local_error;

  std::vector<CubicSpline> splines;
  for (std::size_t c = 0; c < order.size(); ++c) {
    std::vector<double> vals;
    vals.reserve(tab.s.size());
    for (const auto& row : tab.y) vals.push_back(row[c]);
    splines.emplace_back(tab.s, vals);
  }
  // Defining residual: spline derivative against the ODE right-hand side.
  for (std::size_t i = 0; i < tab.s.size(); ++i) {
    std::vector<double> yv;
    for (const auto& sp : splines) yv.push_back(sp(tab.s[i]).v);
    const auto f = rhs(tab.s[i], yv);
    for (std::size_t c = 0; c < order.size(); ++c)
      rep.max_defining_residual = std::max(
          rep.max_defining_residual, std::abs(splines[c](tab.s[i]).d - f[c]));
  }
  for (std::size_t c = 0; c < order.size(); ++c)
    fc.data[order[c]] = DataFn::from_spline(std::move(splines[c]));
  return rep;
}

// ---------------------------------------------------------------------------
// FamilyEvaluator

namespace {

int family_n(Family f) {
  switch (f) {
    case Family::Canonical2: return 2;
    case Family::WdvvT:
    case Family::WdvvS: return 3;
    case Family::HardRod1:
    case Family::HardRod2: return 4;
  }
  return 0;
}

std::vector<std::string> required_data(Family f) {
  switch (f) {
    case Family::Canonical2: return {"u01", "u02"};
    case Family::WdvvT:
    case Family::WdvvS: return {"u01", "u02", "u03"};
    case Family::HardRod1: return {"u01", "u02", "u04"};
    case Family::HardRod2: return {"u01", "u02", "u03", "u04"};
  }
  return {};
}

}  // namespace

FamilyEvaluator::FamilyEvaluator(FamilyConfig fc) : fc_(std::move(fc)) {
  n_ = family_n(fc_.family);
  if (fc_.closure) close_initial_data(fc_);

  switch (fc_.family) {
    case Family::Canonical2:
      if (!fc_.f1) throw InputError("canonical2 requires the function f1");
      break;
    case Family::WdvvT:
    case Family::WdvvS:
      if (!fc_.f1 && !fc_.f1_sigma)
        throw InputError(family_name(fc_.family) + " requires f1 (or its closure)");
      break;
    case Family::HardRod1:
      if (!fc_.c1) throw InputError("hardrod1 requires the function c1");
      fc_.param("a");
      fc_.param("k");
      fc_.param("h");
      break;
    case Family::HardRod2:
      if (!fc_.c1) throw InputError("hardrod2 requires the function c1");
      fc_.param("a");
      if (fc_.param("k") == 0.0)
        throw InputError("hardrod2 requires k != 0 (logarithmic characteristic)");
      break;
  }
  for (const auto& name : required_data(fc_.family)) {
    const DataFn& d = fc_.datum(name);
    fc_.support_lo = std::max(fc_.support_lo, d.support_lo());
    fc_.support_hi = std::min(fc_.support_hi, d.support_hi());
  }
  if (fc_.f1_sigma) {
    fc_.support_lo = std::max(fc_.support_lo, fc_.f1_sigma->support_lo());
    fc_.support_hi = std::min(fc_.support_hi, fc_.f1_sigma->support_hi());
  }
  if (fc_.support_lo >= fc_.support_hi)
    throw InputError("empty sigma support after intersecting the data tables");
}

Jet2 FamilyEvaluator::datum(const std::string& name, double sigma) const {
  return fc_.datum(name)(sigma);
}

Jet2 FamilyEvaluator::f1_at(double sigma, Jet2 arg) const {
  if (fc_.f1_sigma) return (*fc_.f1_sigma)(sigma);
  return (*fc_.f1)(arg);
}

Jet1 FamilyEvaluator::characteristic(double sigma, double t) const {
  const Jet1 sig(sigma, 1.0);
  switch (fc_.family) {
    case Family::Canonical2: {
      const Jet1 u02 = datum("u02", sigma).jet1();
      return sig - u02 * Jet1(t);
    }
    case Family::WdvvT: {
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 u03 = datum("u03", sigma);
      const Jet1 h = f1_at(sigma, u03).jet1();
      return sig - u02.jet1() * Jet1(t) + h * Jet1(0.5 * t * t);
    }
    case Family::WdvvS: {
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 u03 = datum("u03", sigma);
      const Jet1 h = f1_at(sigma, u03).jet1();
      const Jet1 D = Jet1(1.0) - h * u02.jet1() * Jet1(t);
      if (D.v <= 0.0) throw DomainError("blow-up: 1 - f1*u02*t <= 0");
      return sig + u02.jet1() * u02.jet1() * Jet1(t) / (Jet1(2.0) * D);
    }
    case Family::HardRod1: {
      const double a = fc_.param("a"), k = fc_.param("k"), h = fc_.param("h");
      const double Q = h + a - k * t;
      if (std::abs(Q) < 1e-12) throw DomainError("blow-up: h + a - k*t = 0");
      const Jet1 u02 = datum("u02", sigma).jet1();
      const Jet1 u04 = datum("u04", sigma).jet1();
      const double sk = fc_.variant == Variant::Paper ? 1.0 : -1.0;
      const Jet1 N = Jet1(h + sk * k * t) * u02 + Jet1(a) * u04;
      return sig + Jet1(t) * N / Jet1(Q);
    }
    case Family::HardRod2: {
      const double a = fc_.param("a"), k = fc_.param("k");
      const Jet2 u02j = datum("u02", sigma);
      const Jet1 u02 = u02j.jet1();
      const Jet1 u03 = datum("u03", sigma).jet1();
      const Jet1 u04 = datum("u04", sigma).jet1();
      const Jet1 C = (*fc_.c1)(u02j).jet1();
      const Jet1 w0 = u02 - u04;
      const Jet1 G = u03 + Jet1(a);
      const Jet1 K = Jet1(k) + C * G;
      const Jet1 num = G * (Jet1(1.0) + C * w0 * Jet1(t));
      const Jet1 den = G + K * w0 * Jet1(t);
      if (num.v <= 0.0 || den.v == 0.0 || num.v / den.v <= 0.0)
        throw DomainError("blow-up: logarithm argument non-positive");
      return sig + u02 * Jet1(t) + Jet1(a / k) * log(num / den);
    }
  }
  throw InputError("unreachable family");
}

double FamilyEvaluator::jacobian_x_sigma(double sigma, double t) const {
  return characteristic(sigma, t).d;
}

std::vector<double> FamilyEvaluator::fields(double sigma, double t) const {
  switch (fc_.family) {
    case Family::Canonical2: {
      const Jet2 u01 = datum("u01", sigma);
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 f = (*fc_.f1)(u02);
      const double E = std::exp(-u01.v) - f.v * t;
      if (E <= 0.0) throw DomainError("blow-up: exp(-u01) - f1*t <= 0");
      return {-std::log(E), u02.v};
    }
    case Family::WdvvT: {
      const Jet2 u01 = datum("u01", sigma);
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 u03 = datum("u03", sigma);
      const Jet2 h = f1_at(sigma, u03);
      const double xs = 1.0 - u02.d * t + 0.5 * h.d * t * t;
      double u1;
      if (fc_.variant == Variant::Paper) {
        if (xs <= 0.0) throw DomainError("blow-up: x_sigma <= 0 in log");
        u1 = std::log(xs) + u01.v;
      } else {
        u1 = u01.v * xs;
      }
      return {u1, u02.v - h.v * t, u03.v};
    }
    case Family::WdvvS: {
      const Jet2 u01 = datum("u01", sigma);
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 u03 = datum("u03", sigma);
      const Jet2 h = f1_at(sigma, u03);
      const double D = 1.0 - h.v * u02.v * t;
      if (D <= 0.0) throw DomainError("blow-up: 1 - f1*u02*t <= 0");
      if (u03.d == 0.0) throw DomainError("u03' vanishes (u1 formula undefined)");
      const double u2 = u02.v / D;
      double u1;
      if (fc_.variant == Variant::Paper) {
        u1 = (u01.v + u02.v * u02.v * h.v * t *
                          (2.0 * u02.d +
                           t * u02.v * (h.d * u02.v - h.v * u02.d)) /
                          (2.0 * u03.d * D * D)) /
             D;
      } else {
        const double xs = characteristic(sigma, t).d;
        u1 = u2 * h.v * xs / u03.d;
      }
      return {u1, u2, u03.v};
    }
    case Family::HardRod1: {
      const double a = fc_.param("a"), k = fc_.param("k"), h = fc_.param("h");
      const double Q = k * t - h - a;
      if (std::abs(Q) < 1e-12) throw DomainError("blow-up: k*t - h - a = 0");
      const Jet2 u01 = datum("u01", sigma);
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 u04 = datum("u04", sigma);
      const double c = (*fc_.c1)(u02).v;
      return {c * t + u01.v, u02.v, -k * t + h,
              (u02.v * k * t - (h + a) * u04.v) / Q};
    }
    case Family::HardRod2: {
      const double a = fc_.param("a"), k = fc_.param("k");
      const Jet2 u01 = datum("u01", sigma);
      const Jet2 u02 = datum("u02", sigma);
      const Jet2 u03 = datum("u03", sigma);
      const Jet2 u04 = datum("u04", sigma);
      const Jet2 C = (*fc_.c1)(u02);
      const double cp = fc_.c1->deriv(u02).v;
      const double w0 = u02.v - u04.v;
      const double den1 = C.v + w0 * cp;
      if (std::abs(den1) < 1e-14)
        throw DomainError("blow-up: c1 + c1'(u02-u04) = 0");
      const double den4 = C.v * w0 * t + 1.0;
      if (std::abs(den4) < 1e-14)
        throw DomainError("blow-up: 1 + c1(u02-u04)t = 0");
      const double u1 = C.v * C.v * (u01.v + a) * w0 * t / den1 + u01.v;
      const double u3 = w0 * (C.v * (u03.v + a) + k) * t + u03.v;
      const double u4 = (u04.v + u02.v * w0 * C.v * t) / den4;
      return {u1, u02.v, u3, u4};
    }
  }
  throw InputError("unreachable family");
}

double FamilyEvaluator::max_speed() const {
  if (max_speed_cache_) return *max_speed_cache_;
  double lo = std::max(fc_.support_lo, -10.0);
  double hi = std::min(fc_.support_hi, 10.0);
  if (lo >= hi) {
    lo = fc_.support_lo;
    hi = std::min(fc_.support_hi, fc_.support_lo + 20.0);
  }
  const double delta = 1e-4;
  double best = 1.0;
  for (int i = 0; i <= 64; ++i) {
    const double s = lo + (hi - lo) * i / 64.0;
    try {
      best = std::max(best, std::abs(characteristic(s, delta).v - s) / delta);
    } catch (const DomainError&) {
    }
  }
  max_speed_cache_ = best;
  return best;
}

SolveResult FamilyEvaluator::solve_sigma(double x, double t,
                                         std::optional<double> guess) const {
  SolveResult r;
  if (t == 0.0) {
    if (x < fc_.support_lo || x > fc_.support_hi) {
      r.status = PointStatus::OutOfSupport;
      return r;
    }
    r.sigma = x;
    r.residual = 0.0;
    r.x_sigma = characteristic(x, 0.0).d;
    return r;
  }

  const double S = (1.0 + max_speed()) * std::abs(t) * 2.0;
  double lo = x - S, hi = x + S;
  const bool clipped = lo < fc_.support_lo || hi > fc_.support_hi;
  lo = std::max(lo, fc_.support_lo);
  hi = std::min(hi, fc_.support_hi);
  if (lo >= hi) {
    r.status = PointStatus::OutOfSupport;
    return r;
  }

  auto g = [&](double s) { return characteristic(s, t); };

  auto finish = [&](double s, Jet1 gs) {
    r.sigma = s;
    r.residual = std::abs(gs.v - x);
    r.x_sigma = gs.d;
    r.status = gs.d <= 0.0 ? PointStatus::Broken : PointStatus::Ok;
    return r;
  };

  // Warm start: plain Newton from the supplied guess, verified like any root.
  if (guess && *guess >= lo && *guess <= hi) {
    double s = *guess;
    try {
      for (int it = 0; it < 50; ++it) {
        const Jet1 gs = g(s);
        if (std::abs(gs.v - x) < kSigmaTol) return finish(s, gs);
        if (gs.d == 0.0) break;
        double next = s - (gs.v - x) / gs.d;
        if (next < lo || next > hi) break;
        s = next;
      }
    } catch (const DomainError&) {
    }
  }

  // Bracket scan at 64 subdivisions, skipping blown-up labels.
  const int kScan = 64;
  double prev_s = 0.0;
  Jet1 prev_g;
  bool have_prev = false;
  double blo = 0.0, bhi = 0.0;
  Jet1 glo, ghi;
  bool bracket = false;
  int evaluable = 0;
  for (int i = 0; i <= kScan; ++i) {
    const double s = lo + (hi - lo) * i / kScan;
    Jet1 gs;
    try {
      gs = g(s);
    } catch (const DomainError&) {
      have_prev = false;
      continue;
    }
    ++evaluable;
    if (std::abs(gs.v - x) < kSigmaTol) return finish(s, gs);
    if (have_prev && (prev_g.v - x) * (gs.v - x) < 0.0) {
      blo = prev_s;
      bhi = s;
      glo = prev_g;
      ghi = gs;
      bracket = true;
      break;
    }
    prev_s = s;
    prev_g = gs;
    have_prev = true;
  }
  if (!bracket) {
    r.status = (clipped || evaluable == 0) ? PointStatus::OutOfSupport
                                           : PointStatus::Broken;
    return r;
  }

  // Safeguarded Newton within the bracket.
  double s = 0.5 * (blo + bhi);
  for (int it = 0; it < 200; ++it) {
    Jet1 gs;
    try {
      gs = g(s);
    } catch (const DomainError&) {
      r.status = PointStatus::Broken;
      return r;
    }
    if (std::abs(gs.v - x) < kSigmaTol) return finish(s, gs);
    if ((glo.v - x) * (gs.v - x) < 0.0) {
      bhi = s;
      ghi = gs;
    } else {
      blo = s;
      glo = gs;
    }
    double next = gs.d != 0.0 ? s - (gs.v - x) / gs.d : s;
    if (!(next > blo && next < bhi)) next = 0.5 * (blo + bhi);
    if (std::abs(next - s) < 1e-17 * (1.0 + std::abs(s))) {
      s = next;
      break;
    }
    s = next;
  }
  Jet1 gs = g(s);
  if (std::abs(gs.v - x) < 1e-9) return finish(s, gs);
  r.status = PointStatus::Broken;
  r.sigma = s;
  r.residual = std::abs(gs.v - x);
  r.x_sigma = gs.d;
  return r;
}

PointFields FamilyEvaluator::eval_point(double x, double t,
                                        std::optional<double> guess) const {
  PointFields p;
  const SolveResult r = solve_sigma(x, t, guess);
  p.status = r.status;
  p.sigma = r.sigma;
  if (r.status != PointStatus::Ok) return p;
  try {
    p.u = fields(r.sigma, t);
  } catch (const DomainError&) {
    p.status = PointStatus::Broken;
    p.u.clear();
  }
  return p;
}

std::vector<GridRow> FamilyEvaluator::eval_grid(const GridSpec& grid) const {
  if (grid.nx < 1 || grid.nt < 1) throw InputError("grid counts must be >= 1");
  std::vector<GridRow> rows;
  rows.reserve(static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.nt));
  for (int it = 0; it < grid.nt; ++it) {
    const double t =
        grid.nt == 1 ? grid.t0
                     : grid.t0 + (grid.t1 - grid.t0) * it / (grid.nt - 1);
    std::optional<double> warm;
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double x =
          grid.nx == 1 ? grid.x0
                       : grid.x0 + (grid.x1 - grid.x0) * ix / (grid.nx - 1);
      GridRow row{x, t, eval_point(x, t, warm)};
      warm = row.p.status == PointStatus::Ok ? std::optional<double>(row.p.sigma)
                                             : std::nullopt;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string grid_to_csv(const std::vector<GridRow>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows) n = std::max(n, r.p.u.size());
  std::string out = "x,t,status";
  for (std::size_t i = 1; i <= n; ++i) out += ",u" + std::to_string(i);
  out += "\n";
  for (const auto& r : rows) {
    out += fmt17(r.x) + "," + fmt17(r.t) + "," + status_name(r.p.status);
    for (std::size_t i = 0; i < n; ++i)
      out += "," + (i < r.p.u.size() ? fmt17(r.p.u[i]) : std::string("nan"));
    out += "\n";
  }
  return out;
}

}  // namespace jbf

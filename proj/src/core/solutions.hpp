#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "field.hpp"
#include "spline.hpp"

namespace jbf {

enum class Family { Canonical2, WdvvT, WdvvS, HardRod1, HardRod2 };
enum class Variant { Paper, Rederived };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// One initial-data function u0(sigma): a closed-form expression of s, or a
// cubic-spline table produced by the closure integration.
class DataFn {
 public:
  DataFn() = default;
  static DataFn from_expr(const std::string& src,
                          const std::map<std::string, double>& constants = {});
  static DataFn from_spline(CubicSpline sp);

  Jet2 operator()(double sigma) const;
  bool is_spline() const { return spline_.has_value(); }
  double support_lo() const;
  double support_hi() const;
  std::string describe() const;

 private:
  std::shared_ptr<const ExprField> expr_;
  std::optional<CubicSpline> spline_;
};

// A one-argument function such as f1(u3) or c1(u2), evaluated on jets so
// compositions keep exact first and second derivatives.
class ParamFn {
 public:
  ParamFn() = default;
  static ParamFn from_expr(const std::string& src,
                           const std::map<std::string, double>& constants = {});

  Jet2 operator()(Jet2 arg) const;  // f(arg) with chain rule
  Jet1 deriv(Jet2 arg) const;       // f'(arg) as a jet in sigma
  std::string describe() const;

 private:
  std::shared_ptr<const ExprField> expr_;
  expr::VarKind var_ = expr::VarKind::S;
  int uindex_ = 0;
  int arity_ = 0;
};

struct ClosureSpec {
  std::vector<std::string> produce;
  double sigma_lo = 0.0, sigma_hi = 1.0;
  double step = 1e-3;
  std::map<std::string, double> anchors;  // value at sigma_lo
};

struct ClosureReport {
  std::vector<std::string> produced;
  double max_defining_residual = 0.0;
  double max_local_error = 0.0;
};

struct FamilyConfig {
  Family family = Family::Canonical2;
  Variant variant = Variant::Paper;
  std::map<std::string, double> params;  // a, k, h as applicable
  std::optional<ParamFn> f1;
  std::optional<ParamFn> c1;
  std::optional<DataFn> f1_sigma;  // closure-produced f1 as a function of sigma
  std::map<std::string, DataFn> data;  // "u01".."u04"
  double support_lo = -1e300, support_hi = 1e300;
  std::optional<ClosureSpec> closure;

  static FamilyConfig from_json(const std::string& json_text);

  double param(const std::string& name) const;
  const DataFn& datum(const std::string& name) const;
};

// Integrates the family's closure ODEs (classical RK4 with step-halving
// error control) and installs the produced functions as splines.
ClosureReport close_initial_data(FamilyConfig& fc);

enum class PointStatus { Ok, Broken, OutOfSupport };
std::string status_name(PointStatus s);

struct SolveResult {
  PointStatus status = PointStatus::Ok;
  double sigma = 0.0;
  double residual = 0.0;
  double x_sigma = 0.0;
};

struct PointFields {
  PointStatus status = PointStatus::Ok;
  double sigma = 0.0;
  std::vector<double> u;
};

struct GridSpec {
  double x0 = 0.0, x1 = 1.0;
  int nx = 1;
  double t0 = 0.0, t1 = 0.0;
  int nt = 1;
};

struct GridRow {
  double x, t;
  PointFields p;
};

class FamilyEvaluator {
 public:
  explicit FamilyEvaluator(FamilyConfig fc);

  int n() const { return n_; }
  const FamilyConfig& config() const { return fc_; }

  // Characteristic relation x = X(sigma, t) with d/dsigma.
  Jet1 characteristic(double sigma, double t) const;
  double jacobian_x_sigma(double sigma, double t) const;

  // Field values at a characteristic label; throws DomainError past blow-up.
  std::vector<double> fields(double sigma, double t) const;

  SolveResult solve_sigma(double x, double t,
                          std::optional<double> guess = std::nullopt) const;

  PointFields eval_point(double x, double t,
                         std::optional<double> guess = std::nullopt) const;

  std::vector<GridRow> eval_grid(const GridSpec& grid) const;

 private:
  Jet2 datum(const std::string& name, double sigma) const;
  Jet2 f1_at(double sigma, Jet2 arg) const;
  double max_speed() const;

  FamilyConfig fc_;
  int n_ = 0;
  mutable std::optional<double> max_speed_cache_;
};

std::string grid_to_csv(const std::vector<GridRow>& rows);

}  // namespace jbf

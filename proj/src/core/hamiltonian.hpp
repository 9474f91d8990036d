#pragma once

#include <utility>

#include "constraints.hpp"
#include "systems.hpp"

namespace jbf {

// Hankel metric for 2x2 blocks: g11 = 0, g12 = g21, optional g22.
struct HankelMetric2 {
  Field g12;
  Field g22;  // zero field unless set explicitly
};

// g12(u1,u2) = (f1(u2)/mu) exp(int_{u1_ref}^{u1} lambda_{u2}/mu), g22 = 0.
// Requires linear degeneracy at probe points and mu != 0 on the path.
HankelMetric2 build_metric(const JordanSystem& sys, const Field& f1,
                           double u1_ref,
                           const std::vector<std::vector<double>>& probe_points = {});

// Tsarev residuals at a point:
//   first  = max |(gA)_{ij} - (gA)_{ji}|       (symmetry condition)
//   second = max of the two nontrivial covariant-constancy scalars
std::pair<double, double> tsarev_residual(const JordanSystem& sys,
                                          const HankelMetric2& m, const Point& p);

// |scalar curvature| of the 2D metric, second derivatives by centered
// differences (step h) of the exact first derivatives, one Richardson pass.
double flatness_residual(const HankelMetric2& m, const Point& p, double h = 1e-4);

// theta(u1,u2) = f(u2) exp(int lambda_{u2}/mu); returns the value and the
// pointwise difference from phi_closed_form_2x2 with matching inputs.
std::pair<double, double> theta(const JordanSystem& sys, const Field& f,
                                double u1_ref, const Point& p);

}  // namespace jbf

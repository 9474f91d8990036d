#pragma once

#include <array>
#include <utility>
#include <vector>

#include "systems.hpp"

namespace jbf {

// One quasilinear constraint u^{k_a}_{a,x} = phi^a per block.
struct ConstraintSpec {
  std::vector<Field> phi;
};

// Residuals of the 2x2 compatibility conditions.
//   first  = d lambda / d u1                    (phi-independent)
//   second = lambda_{u2} phi^2 + lambda phi_x - phi_t - mu phi phi_{u1}
std::pair<double, double> compat_residual_2x2(const JordanSystem& sys,
                                              const Field& phi, const Point& p);

// Closed-form constraint phi(u1,u2) = f1(u2) exp(int_{u1_ref}^{u1} lambda_{u2}/mu),
// realized as a field whose evaluation performs the quadrature.  Requires the
// system to be linearly degenerate at the probe points.
Field phi_closed_form_2x2(const JordanSystem& sys, const Field& f1,
                          double u1_ref,
                          const std::vector<std::vector<double>>& probe_points = {});

// Compatibility residuals for a system of exactly two Toeplitz blocks of
// sizes k and m, ordered: the two eigenvalue conditions, k-2 conditions in
// the first block's interior variables, m-1 in the second block's, the full
// evolution condition for phi^1, then the mirrored set for phi^2.
std::vector<double> compat_residual_two_block(const JordanSystem& sys,
                                              const Field& phi1,
                                              const Field& phi2, const Point& p);

// phi^i = f^i / (lambda^2 - lambda^1) for the two-block (2+2) systems.
struct HardRodConstraint {
  Field phi1, phi2, phi3;
};
HardRodConstraint hardrod_phi(const Field& f1, const Field& f2, const Field& f3,
                              const JordanSystem& sys);

// Left-hand sides of the three source-term conditions for the hard-rod
// closures.  The second condition is evaluated with the sign that the
// closed-form solutions actually satisfy.
std::array<double, 3> hardrod_f_residual(const Field& f1, const Field& f2,
                                         const Field& f3, const Point& p,
                                         double a);

}  // namespace jbf

#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "droplet/state_dynamics.hpp"

namespace droplet {

// Exact linear-velocity free-boundary flows on ellipses, used as ground
// truth for the time stepper.  v = A x with tr A = 0 on {x^T Q x < 1},
// no gravity.
//
// Derivation (validated numerically by momentum_residual and by the
// kinematic and Taylor checks in the tests):
//   * Boundary points move by xdot = A x, so the quadratic form is carried
//     by the inverse flow: dQ/dt = -A^T Q - Q A.
//   * Momentum reads (dA/dt + A^2) x = -grad p, so p is a quadratic that
//     vanishes on the whole ellipse boundary; the only such quadratic is
//       p = kappa (1 - x^T Q x) / 2.
//     Matching Delta p = -tr((grad v)^2) = -tr(A^2) fixes
//       kappa = tr(A^2) / tr(Q),
//     hence dA/dt = -A^2 + kappa Q, which stays trace-free since
//     tr(A^2) = kappa tr Q.
//   * Taylor coefficient on the boundary (unit outward normal Qx/|Qx|):
//       a = -grad p . n = kappa |Q x|.
// Consequences: det Q (area), and the kinetic energy are conserved.

struct AffineState {
    Mat2 A;  // velocity gradient, trace-free
    Mat2 Q;  // symmetric positive definite domain form

    AffineState(const Mat2& a, const Mat2& q);  // throws ConfigError
};

struct AffineRhs {
    Mat2 dA, dQ;
    Real kappa;  // pressure scale: p = kappa (1 - x^T Q x)/2
};

AffineRhs affine_rhs(const AffineState& s);
Real affine_kappa(const AffineState& s);

// Ellipse as a radial graph: eta(theta) = (u^T Q u)^{-1/2} - 1.
Vec affine_eta(const AffineState& s, int n_theta);
// Closed-form Taylor coefficient at the graph nodes.
Vec affine_taylor(const AffineState& s, int n_theta);
Real affine_area(const AffineState& s);    // pi / sqrt(det Q)
Real affine_energy(const AffineState& s);  // 1/2 int |A x|^2 dx

// Generic adaptive Dormand-Prince 5(4) integrator (also used by the
// consistency tests to co-integrate boundary markers).
Vec ode45(const std::function<Vec(Real, const Vec&)>& f, Vec y0, Real t0,
          Real t1, Real tol);

AffineState integrate_affine(const AffineState& s0, Real T, Real tol = 1e-12);
std::vector<std::pair<Real, AffineState>> affine_trajectory(
    const AffineState& s0, Real T, int n_samples, Real tol = 1e-12);

// Independent check of the closed-form rhs: central finite differences of
// the integrated A(t) against -A^2 + kappa Q, evaluated as a sup over
// interior sample points of the momentum equation residual.
Real momentum_residual(const AffineState& s0, Real t, Real tol = 1e-12);

// Sample the affine state on a chart.  Throws CollarExit when the ellipse
// graph leaves the admissible collar.  When asked, reports the sup
// difference between the state's computed Taylor coefficient and the
// closed form.
FluidState to_fluid_state(const AffineState& s, int n_theta, int n_rho,
                          Real* taylor_residual = nullptr);

// CSV rows "t,a11,a12,a21,a22,q11,q12,q22" with a header line.
void write_affine_csv(std::ostream& os,
                      const std::vector<std::pair<Real, AffineState>>& traj);

}  // namespace droplet

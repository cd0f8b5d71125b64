#pragma once

#include "droplet/boundary_geometry.hpp"
#include "droplet/chart_fields.hpp"
#include "droplet/elliptic_core.hpp"

namespace droplet {

inline constexpr Real kRegDivTol = 1e-8;

// Averaging kernel with unit mass and vanishing moments 1..order, carried
// as an exact Gauss rule (nodes + weights) for a polynomial-times-bump
// density on an inward-shifted product footprint:
//   radial factor on [shift - width, shift + width], strictly one-sided,
//   lateral factor on [-lateral, lateral], even.
// Offsets are stored at canonical scale; at scale j the footprint contracts
// by 2^{-j} and rotates so its axis points inward along the local radius.
// Moment conditions are enforced on the rule itself, so they hold to
// machine precision and polynomial reproduction is exact up to chart
// interpolation error.
class MomentKernel {
public:
    explicit MomentKernel(int order = 4, Real width = 2.0, Real shift_ratio = 1.3,
                          Real lateral_frac = 0.8);

    int order() const { return order_; }
    Real width() const { return width_; }
    Real lateral() const { return lateral_; }
    Real shift() const { return shift_; }                  // |e|, footprint center depth
    Real support_radius() const;                           // half-diagonal of the support box
    Real mass_defect() const { return mass_defect_; }      // |sum W - 1|
    Real moment_defect() const { return moment_defect_; }  // max moment 1 <= |a| <= order
    Real sum_abs_weights() const { return sum_abs_w_; }    // discrete L1 mass

    // Depth of the shallowest sample below a boundary with slope bound
    // |R'|/R <= lip, at canonical scale; <= 0 means the footprint cannot
    // stay inside such a domain at any scale.
    Real clearance(Real lip) const;

    const Mat& offsets() const { return off_; }  // 2 x Q: (radial, lateral)
    const Vec& weights() const { return w_; }    // Q

private:
    int order_;
    Real width_, lateral_, shift_;
    Mat off_;
    Vec w_;
    Real mass_defect_ = 0, moment_defect_ = 0, sum_abs_w_ = 0;
};

// Footprint average of u at every node of the target chart, with the kernel
// contracted to scale 2^{-j}.  Reproduces polynomials of degree <= order and
// damps oscillations finer than 2^{-j}.  The target boundary may sit outside
// the source boundary by at most the kernel clearance at scale j; beyond
// that (or if any sample escapes the source chart) EnlargementTooLarge.
Field mollify(const Field& u, int j, ChartPtr target, const MomentKernel& k);
VectorField mollify(const VectorField& u, int j, ChartPtr target, const MomentKernel& k);

// Divergence-free smoothing: mollify, then remove the gradient part
//   w - grad q,  div grad q = div w,  q = 0 on the target boundary,
// so the output divergence equals the solve residual.  When the mollified
// field is already divergence-free within div_tol the correction is skipped
// (solving for a roundoff-level right-hand side only injects derivative
// noise).  The solver must live on the target chart.
VectorField div_free_regularize(const VectorField& v, int j, const DirichletSolver& solver,
                                const MomentKernel& k, Real div_tol = kRegDivTol);
VectorField div_free_regularize(const VectorField& v, int j, ChartPtr target,
                                const MomentKernel& k, Real div_tol = kRegDivTol);

// Dyadic frequency projections on the circle, built from the smooth bump
// multiplier in circle.hpp.  Low with j at or above the top occupied block
// returns the input bitwise (P_{<=inf} = identity).
enum class LpBand { Block, Low, High };
BoundaryScalar lp_project_circle(const BoundaryScalar& f, int j, LpBand band);

// Heat-smooth the boundary graph over time eps^2 and lower it so the new
// domain is contained in the old one:
//   eta_eps = e^{eps^2 d^2/dtheta^2} eta - C eps^2,
//   C = max(0, max(smoothed - eta)) / eps^2 + c_margin.
BoundaryGraph parabolic_smooth(const BoundaryGraph& g, Real eps, Real c_margin = 1.0);

}  // namespace droplet

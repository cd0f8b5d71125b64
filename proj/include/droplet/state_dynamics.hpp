#pragma once

#include "droplet/elliptic_core.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace droplet {

inline constexpr Real kDefaultDivTol = 1e-6;
inline constexpr Real kDefaultAFloor = 1e-8;
inline constexpr int kDefaultEnergyK = 3;

// A fluid state: divergence-free velocity samples on a boundary-fitted chart.
// Everything the dynamics needs downstream of (v, Gamma) -- pressure, Taylor
// coefficient, their material derivatives, vorticity -- is defined by elliptic
// problems on the current domain and computed lazily into a cache.  Completed
// states are immutable value types; mutation goes through set_velocity, which
// drops the cache.  Cache fill is sequential per state (not thread-safe);
// distinct states may be processed concurrently.
class FluidState {
public:
    // Throws GridMismatch when max |div v| exceeds div_tol.  An optional
    // floor c0 arms the Taylor-sign guard: with it set, taylor() throws
    // TaylorSignViolation whenever min a < c0.
    explicit FluidState(VectorField v, Real gravity = 0.0, Real div_tol = kDefaultDivTol,
                        std::optional<Real> taylor_floor = std::nullopt);

    const ChartPtr& chart() const { return v_.chart(); }
    const BoundaryGraph& gamma() const { return chart()->gamma; }
    const VectorField& velocity() const { return v_; }
    Real gravity() const { return gravity_; }
    Real div_max() const { return div_max_; }
    std::optional<Real> taylor_floor() const { return taylor_floor_; }

    void set_velocity(VectorField v);  // revalidates divergence, drops cache

    // Heavy elliptic machinery, built on first use.  States living on the
    // same chart can share a solver (and its LU factorization) / DtN map.
    const DirichletSolver& solver() const;
    const DtNOperator& dtn() const;
    // Shared handles to the cached operators (built on demand), so states on
    // the same chart can reuse one factorization via share_elliptic.
    std::shared_ptr<const DirichletSolver> solver_ptr() const;
    std::shared_ptr<const DtNOperator> dtn_ptr() const;
    void share_elliptic(std::shared_ptr<const DirichletSolver> solver,
                        std::shared_ptr<const DtNOperator> dtn = nullptr);

    // Interior pressure:  div grad p = -tr((grad v)^2),  p = 0 on the boundary.
    // Gravity does not enter the pressure problem; the body force acts as a
    // separate term in the momentum update.
    const Field& pressure() const;

    // Taylor coefficient a = -n . grad p on the boundary, and its minimum.
    const BoundaryScalar& taylor() const;
    Real min_taylor() const;

    // Material derivative of the pressure, defined through
    //   div grad (D_t p) = 4 tr(H_p grad v) + 2 tr((grad v)^3) + (lap v) . grad p
    // with zero boundary values (H_p = Hessian of p).  This is the elliptic
    // characterization that matches d/dt along particle paths for states
    // evolving under the equations of motion, gravity included.
    const Field& dt_pressure() const;

    // D_t grad p = -(grad v)* grad p + grad D_t p, with the adjoint-Jacobian
    // convention ((grad v)* w)_i = d_i v_j w_j.
    const VectorField& dt_grad_pressure() const;

    // D_t a = -n . (D_t grad p) on the boundary.
    const BoundaryScalar& dt_taylor() const;

    // Scalar vorticity curl v = dx v_y - dy v_x, transported by the flow.
    const Field& vorticity() const;

private:
    VectorField v_;
    Real gravity_;
    Real div_tol_;
    Real div_max_ = 0.0;
    std::optional<Real> taylor_floor_;

    mutable std::shared_ptr<const DirichletSolver> solver_;
    mutable std::shared_ptr<const DtNOperator> dtn_;
    mutable std::optional<Field> p_;
    mutable std::optional<BoundaryScalar> a_;
    mutable std::optional<Field> dtp_;
    mutable std::optional<VectorField> dt_grad_p_;
    mutable std::optional<BoundaryScalar> dta_;
    mutable std::optional<Field> omega_;
};

// Quadratic form driving the linearized evolution: for an interior vector
// field w and boundary scalar s,
//   E_lin(w, s) = 1/2 int |w|^2 dx + 1/2 int a s^2 dS.
// The boundary term is signed; negative a contributes as-is.
Real energy_lin(const FluidState& state, const VectorField& w, const BoundaryScalar& s);

struct EnergyReport {
    Real e_lin;         // E_lin(w_k, s_k)
    Real e_k;           // 1 + v_l2_sq + omega_sq + e_lin
    Real e_k_modified;  // weighted variant; NaN unless computed
    // components (unweighted integrals; e_k applies the 1/2 factors via e_lin)
    Real v_l2_sq;     // int |v|^2 dx
    Real omega_sq;    // squared H^{k-1} norm of the vorticity
    Real w_l2_sq;     // int |w_k|^2 dx
    Real surface_sq;  // int a s_k^2 dS (signed)
    int k;
};

// Order-k energy built from the good variables
//   w_k = grad H N^{k-2} D_t a,   s_k = N^{k-1} a
// (H = harmonic extension, N = Dirichlet-to-Neumann map):
//   E^k = 1 + int |v|^2 + |omega|_{H^{k-1}}^2 + E_lin(w_k, s_k).
// Requires k >= 3 and k - 1 within the trusted DtN power budget.
EnergyReport energy_k(const FluidState& state, int k = kDefaultEnergyK);

// Weighted variant, defined only under the Taylor sign condition:
//   1 + int |v|^2 + |omega|_{H^{k-1}}^2
//     + |grad H N^{k-2}(a^{-1} D_t a)|_{L2}^2 + int a^{-1} (N^{k-1} a)^2 dS.
// Fills both e_k and e_k_modified; throws TaylorSignViolation when
// min a <= a_floor.
EnergyReport energy_k_modified(const FluidState& state, int k = kDefaultEnergyK,
                               Real a_floor = kDefaultAFloor);

// Conserved total energy int (|v|^2/2 + g x_2) dx (kinetic plus potential;
// the body force points down the second axis).
Real conserved_energy(const FluidState& state);

struct ControlReport {
    Real a_sharp;    // |v|_{C^{1/2}} seminorm + Lipschitz size of the graph
    Real b_sharp;    // |v|_{Lip} + C^{1,1/2} seminorm of the graph
    Real a_eps;      // inhomogeneous C^{1/2+eps}(v) + C^{1,eps}(graph), eps = collar_eps
    Real b_diff;     // W^{1,inf}(v) + W^{1,inf}(D_t p) + C^{1,1/2} graph norm
    Real b_lin;      // |a^{-1} D_t a|_inf + |grad v|_inf; +inf when min a <= 0
    Real min_a;      // reported as computed, never clamped
    Real thickness;  // two-sided ball-graph scale of the boundary
};

// Pointwise control parameters of a state.  Velocity Hoelder seminorms are
// pairwise quotients over the grid samples; graph norms come from the dyadic
// characterization on the circle.
ControlReport control_report(const FluidState& state);

// Nodal residual of the curvature-pressure relation on the boundary,
//   kappa + a^{-1} (lap p - H_p(n, n)),
// which vanishes identically because p is constant on the boundary (kappa is
// the graph curvature, positive for a disk).  Meaningful where a is away
// from zero.
BoundaryScalar curvature_pressure_residual(const FluidState& state);

struct MotionIdentityReport {
    Real normal;       // D_t n = -((grad v)* n)^tangential
    Real extension;    // commutator of D_t with the harmonic extension
    Real dtn_map;      // commutator of D_t with the Dirichlet-to-Neumann map
    Real surface;      // Leibniz rule for boundary integrals
    Real area_rate;    // |d/dt area| straight difference quotient
};

// Check the moving-surface identities along a trajectory of at least three
// states at uniform spacing dt.  For each interior triple, the left sides
// are centered difference quotients along particle paths reconstructed from
// the middle velocity; the right sides are spatial formulas at the middle
// state.  probe supplies boundary data / the surface integrand as a fixed
// function of position.  Returns max residuals; expect O(dt) plus spatial
// discretization error.
MotionIdentityReport check_moving_identities(const std::vector<FluidState>& traj, Real dt,
                                             const std::function<Real(Real, Real)>& probe);

}  // namespace droplet

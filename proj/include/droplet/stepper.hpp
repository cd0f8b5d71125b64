#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "droplet/regularization.hpp"
#include "droplet/state_dynamics.hpp"

namespace droplet {

// One explicit step of the free-boundary evolution splits into three phases:
//   1. domain regularization  -- parabolically smooth the boundary graph and
//      restrict the velocity onto the (weakly contained) smoothed domain;
//   2. velocity regularization -- remove the unresolved-by-eps part of the
//      normal trace from the irrotational component of the velocity;
//   3. Euler transport        -- move the boundary with the flow, push the
//      velocity forward with the pressure/gravity update, re-fit the radial
//      graph by ray casting, and project back to divergence-free.
// run() iterates full steps to a horizon under a continuation monitor.

struct StepConfig {
    Real eps = 1e-3;       // step length
    int k = kDefaultEnergyK;  // energy index for the per-step ratio
    Real taylor_floor = 0.05;  // monitor floor c0 for min a; <= 0 disarms
    Real thickness_min = kDefaultRMin;  // monitor floor for min(1 + eta)
    Real a_max = 10.0;     // monitor ceiling for the sharp control A
    Real b_budget = 10.0;  // monitor budget for int B dt
    int max_steps = 100000;
    Real c_margin = 0.0;   // extra inward shift (in units of eps^2) in phase 1
    Real div_tol = kDefaultDivTol;  // divergence gate for states built here
    Real mean_tol = 1e-7;  // flux-mean gate for the velocity phase
    MomentKernel kernel{};  // mollifier driving the velocity phase
    std::optional<int> j_half_override;  // mollification scale, else from eps

    // Frequency cutoff for the normal-trace projection.
    Real lambda_cut() const { return 1.0 / eps; }
    // Mollification scale: 2^j ~ eps^{-1/2}.
    int j_half() const;
    // eps > 0 and eps >= 4 h_min^2 (h_min = smallest grid spacing), so the
    // O(eps^2) per-step signals sit above the interpolation noise floor.
    void validate(const DiskChart& chart) const;
};

struct StepReport {
    Real t_pre = 0.0;  // time at the start of the step
    Real eps = 0.0;
    EnergyReport energy_pre, energy_post;
    ControlReport control_pre, control_post;
    Real energy_ratio = 0.0;      // E^k(post) / E^k(pre)
    Real domain_change_c1 = 0.0;  // phase 1: ||eta_eps - eta||_C1
    Real velocity_change = 0.0;   // phase 2: sup |v_eps - v|
    Real flux_mean = 0.0;         // phase 2: net flux of the removed trace
    Real residual_c0 = 0.0;       // phase 3: Euler update residual, sup norm
    Real residual_c1 = 0.0;       //   ... including first derivatives
    Real volume_drift = 0.0;      // phase 3: relative enclosed-area change
    Real b_integral = 0.0;        // running int B dt up to the end of step
    int invert_iters = 0;         // fixed-point iterations for the pullback
};

// Phase 1: shrink the graph by parabolic smoothing and resample velocity.
FluidState step_domain_reg(const FluidState& s, const StepConfig& cfg,
                           StepReport* rep = nullptr);

// Phase 2: v - grad H N^{-1} P_{> 1/eps}(w . n) with w = v - Psi_{<= j} v.
// Throws NonzeroMean when the normal trace carries net flux.
FluidState step_velocity_reg(const FluidState& s, const StepConfig& cfg,
                             StepReport* rep = nullptr);

// Phase 3: transport boundary and velocity by eps, apply the pressure and
// gravity update, re-fit the radial graph, project to divergence-free.
// Throws StarShapeViolation when the moved boundary is no longer a radial
// graph and InversionFailure when the pullback iteration fails.
FluidState step_euler_transport(const FluidState& s, const StepConfig& cfg,
                                StepReport* rep = nullptr);

// All three phases; fills the report including energies and controls.
FluidState full_step(const FluidState& s, const StepConfig& cfg, StepReport& rep);

// Continuation monitor: first tripped condition, or None.
TripReason monitor_state(const FluidState& s, const ControlReport& ctrl,
                         const StepConfig& cfg, Real b_integral);

struct Trajectory {
    std::vector<FluidState> states;   // states[0] is the initial state
    std::vector<StepReport> reports;  // reports[i] maps states[i] -> states[i+1]
    TripReason trip = TripReason::None;
    int trip_step = -1;       // step index at which the monitor tripped
    std::string trip_message;
    Real dt = 0.0;

    int steps() const { return static_cast<int>(reports.size()); }
    Real time(int i) const { return dt * i; }
};

// Iterate ceil(T / eps) full steps, monitoring before each step and after
// the last. Stored states are stripped of operator caches to keep memory
// proportional to the grid, not to the factorizations.
Trajectory run(const FluidState& init, const StepConfig& cfg, Real T,
               const std::function<void(const StepReport&)>& on_step = {});

// Throws MonitorTrip when the trajectory ended on a tripped monitor.
void require_clean(const Trajectory& t);

// Re-fit a radial graph to a moved copy of g's boundary nodes by ray
// casting against the trigonometric interpolant of the node cloud.
BoundaryGraph transport_graph(const BoundaryGraph& g, const Mat2X& moved);

}  // namespace droplet

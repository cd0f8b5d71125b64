#pragma once

#include "droplet/stepper.hpp"

namespace droplet {

// Two-solution distance on intersecting domains:
//   D = 1/2 int_{Omega~} |v - v_h|^2 dx + 1/2 int_{Gamma~} b (p - p_h)^2 dS,
// where Omega~ is the intersection, Gamma~ its boundary, and the weight b
// is 1/a on the piece owned by the first boundary and 1/a_h on the piece
// owned by the second.  Each state's own pressure vanishes on its own
// boundary, so on coinciding (common) pieces p - p_h = 0 exactly and no
// weight is needed there.

struct DistanceReport {
    Real d_value = 0;      // volume_part + surface_part
    Real volume_part = 0;  // 1/2 int |v - v_h|^2 over the intersection
    Real surface_part = 0;
    // surface breakdown by owning region
    Real surface_a = 0;       // nodes where the first boundary is inner
    Real surface_ah = 0;      // nodes where the second boundary is inner
    Real surface_common = 0;  // identically zero by construction
    int n_a = 0, n_ah = 0, n_common = 0;
};

// Throws GridMismatch (different circles), TaylorSignViolation (weight
// needed where the Taylor coefficient is not above taylor_floor), and
// propagates DomainNotContained from chart evaluation.
DistanceReport distance(const FluidState& a, const FluidState& b,
                        Real taylor_floor = 0.0);

// Empirical check of d/dt D <= C (B + B_h) D along two trajectories:
// per sampled interval, ratio_i = log(D_{i+1}/D_i) / int (B + B_h) dt.
struct GronwallReport {
    Vec times;       // sample instants t_i
    Vec d_values;    // D(t_i)
    Vec ratios;      // per-interval fitted constant (NaN where D ~ 0)
    Real max_ratio;  // empirical C_A; NaN when degenerate
    bool degenerate = false;  // all sampled D below noise
    bool used_b_sharp = false;
};

// B defaults to the difference-estimate control b_diff; use_b_sharp swaps
// in the coarser b_sharp control.  Trajectories must be time-aligned and
// clean (no monitor trip).  Samples every `stride` stored states.
GronwallReport gronwall_check(const Trajectory& ta, const Trajectory& tb,
                              int stride = 1, bool use_b_sharp = false,
                              Real taylor_floor = 0.0);

}  // namespace droplet

#include "droplet/distance.hpp"

#include <cmath>
#include <limits>

#include "droplet/chart_fields.hpp"

namespace droplet {

namespace {

// Contributions of the nodes owned by `inner` (the boundary that is
// strictly inside at those nodes): quadrature on the inner boundary with
// its own arclength element, weight 1/a_inner, and the outer state's
// pressure interpolated at the inner boundary points.  The inner state's
// own pressure vanishes there exactly.
Real owned_surface(const std::vector<RegionTag>& tags, RegionTag who,
                   const FluidState& inner, const FluidState& outer,
                   Real taylor_floor, int& count) {
    const BoundaryGraph& g = inner.gamma();
    const int n = g.n_theta();
    std::vector<int> idx;
    for (int k = 0; k < n; ++k)
        if (tags[k] == who) idx.push_back(k);
    count = static_cast<int>(idx.size());
    if (idx.empty()) return 0.0;

    const BoundaryScalar& a_in = inner.taylor();
    for (int k : idx)
        if (!(a_in[k] > taylor_floor))
            throw TaylorSignViolation("distance weight needs Taylor coefficient above " +
                                      std::to_string(taylor_floor));

    Mat2X pts(2, idx.size());
    const Mat2X all = g.points();
    for (size_t j = 0; j < idx.size(); ++j) pts.col(j) = all.col(idx[j]);
    const Vec p_out = eval_xy(outer.pressure(), pts);

    const Vec sp = g.speed();
    const Real dth = 2 * M_PI / n;
    Real acc = 0;
    for (size_t j = 0; j < idx.size(); ++j) {
        const int k = idx[j];
        acc += 0.5 * p_out[j] * p_out[j] / a_in[k] * sp[k] * dth;
    }
    return acc;
}

Real control_value(const ControlReport& c, bool use_b_sharp) {
    return use_b_sharp ? c.b_sharp : c.b_diff;
}

}  // namespace

DistanceReport distance(const FluidState& a, const FluidState& b, Real taylor_floor) {
    const IntersectionGraph ig = intersection_graph(a.gamma(), b.gamma());

    DistanceReport rep;
    // Surface part, split at tag changes; common nodes contribute zero.
    rep.surface_a = owned_surface(ig.tags, RegionTag::A, a, b, taylor_floor, rep.n_a);
    rep.surface_ah = owned_surface(ig.tags, RegionTag::Ah, b, a, taylor_floor, rep.n_ah);
    rep.n_common = static_cast<int>(ig.tags.size()) - rep.n_a - rep.n_ah;
    rep.surface_common = 0.0;
    rep.surface_part = rep.surface_a + rep.surface_ah + rep.surface_common;

    // Volume part on the intersection chart.
    if (rep.n_common == static_cast<int>(ig.tags.size()) &&
        a.velocity().x.v.isApprox(b.velocity().x.v, 0) &&
        a.velocity().y.v.isApprox(b.velocity().y.v, 0) &&
        a.chart() == b.chart()) {
        rep.volume_part = 0.0;  // identical states: exact zero
    } else {
        const int n_rho = std::max(a.chart()->n_rho(), b.chart()->n_rho());
        const ChartPtr tilde = make_chart(ig.graph, n_rho);
        const VectorField va = restrict_vector(a.velocity(), tilde);
        const VectorField vb = restrict_vector(b.velocity(), tilde);
        Field diff2 = zero_field(tilde);
        diff2.v = (va.x.v - vb.x.v).array().square() + (va.y.v - vb.y.v).array().square();
        rep.volume_part = 0.5 * integrate(diff2);
    }

    rep.d_value = rep.volume_part + rep.surface_part;
    return rep;
}

GronwallReport gronwall_check(const Trajectory& ta, const Trajectory& tb, int stride,
                              bool use_b_sharp, Real taylor_floor) {
    if (stride < 1) throw ConfigError("stride must be positive");
    require_clean(ta);
    require_clean(tb);
    if (ta.states.size() != tb.states.size() ||
        std::abs(ta.dt - tb.dt) > 1e-14 * std::max<Real>(1, std::abs(ta.dt)))
        throw ConfigError("trajectories are not time-aligned");

    const int n_states = static_cast<int>(ta.states.size());
    std::vector<int> sample;
    for (int i = 0; i < n_states; i += stride) sample.push_back(i);
    if (sample.back() != n_states - 1) sample.push_back(n_states - 1);
    const int m = static_cast<int>(sample.size());

    GronwallReport rep;
    rep.used_b_sharp = use_b_sharp;
    rep.times.resize(m);
    rep.d_values.resize(m);
    for (int j = 0; j < m; ++j) {
        rep.times[j] = ta.time(sample[j]);
        rep.d_values[j] = distance(ta.states[sample[j]], tb.states[sample[j]], taylor_floor).d_value;
    }

    const Real noise = 1e-26;
    rep.ratios = Vec::Constant(std::max(m - 1, 0), std::numeric_limits<Real>::quiet_NaN());
    rep.max_ratio = std::numeric_limits<Real>::quiet_NaN();
    bool any = false;
    for (int j = 0; j + 1 < m; ++j) {
        const Real d0 = rep.d_values[j], d1 = rep.d_values[j + 1];
        if (d0 <= noise || d1 <= noise) continue;
        // int (B + B_h) dt over the covered steps, trapezoidal per step
        Real ib = 0;
        for (int s = sample[j]; s < sample[j + 1]; ++s) {
            const StepReport& ra = ta.reports[s];
            const StepReport& rb = tb.reports[s];
            ib += 0.5 * ra.eps *
                  (control_value(ra.control_pre, use_b_sharp) +
                   control_value(ra.control_post, use_b_sharp));
            ib += 0.5 * rb.eps *
                  (control_value(rb.control_pre, use_b_sharp) +
                   control_value(rb.control_post, use_b_sharp));
        }
        if (ib <= 0) continue;
        rep.ratios[j] = std::log(d1 / d0) / ib;
        rep.max_ratio = any ? std::max(rep.max_ratio, rep.ratios[j]) : rep.ratios[j];
        any = true;
    }
    rep.degenerate = !any;
    return rep;
}

}  // namespace droplet

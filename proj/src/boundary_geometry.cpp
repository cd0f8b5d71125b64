#include "droplet/boundary_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace droplet {

BoundaryGraph::BoundaryGraph(Vec eta_values, Real eps, Real delta, Real r_min)
    : circle(static_cast<int>(eta_values.size())),
      eta(std::move(eta_values)),
      collar_eps(eps),
      collar_delta(delta) {
    if ((eta.array() + 1.0).minCoeff() <= r_min)
        throw StarShapeViolation("1 + eta dips to " +
                                 std::to_string((eta.array() + 1.0).minCoeff()) +
                                 " (floor " + std::to_string(r_min) + ")");
    eta_hat = fourier_coeffs(eta);
}

Mat2X BoundaryGraph::points() const {
    const int n = n_theta();
    Vec t = thetas(), R = radius();
    Mat2X p(2, n);
    for (int k = 0; k < n; ++k) {
        p(0, k) = R[k] * std::cos(t[k]);
        p(1, k) = R[k] * std::sin(t[k]);
    }
    return p;
}

Mat2X BoundaryGraph::tangents() const {
    const int n = n_theta();
    Vec t = thetas(), R = radius(), Rp = radius_dtheta();
    Mat2X tv(2, n);
    for (int k = 0; k < n; ++k) {
        const Real c = std::cos(t[k]), s = std::sin(t[k]);
        tv(0, k) = Rp[k] * c - R[k] * s;
        tv(1, k) = Rp[k] * s + R[k] * c;
    }
    return tv;
}

Vec BoundaryGraph::speed() const {
    Vec R = radius(), Rp = radius_dtheta();
    return (R.array().square() + Rp.array().square()).sqrt();
}

Real BoundaryGraph::length() const {
    return speed().sum() * (2.0 * std::acos(-1.0) / n_theta());
}

Mat2X outward_normal(const BoundaryGraph& g) {
    Mat2X t = g.tangents();
    const int n = g.n_theta();
    Mat2X nv(2, n);
    for (int k = 0; k < n; ++k) {
        const Real len = std::hypot(t(0, k), t(1, k));
        nv(0, k) = t(1, k) / len;
        nv(1, k) = -t(0, k) / len;
    }
    return nv;
}

Vec mean_curvature(const BoundaryGraph& g) {
    Vec R = g.radius(), Rp = g.radius_dtheta(), Rpp = g.radius_d2theta();
    Vec kappa(g.n_theta());
    for (int k = 0; k < g.n_theta(); ++k) {
        const Real num = R[k] * R[k] + 2.0 * Rp[k] * Rp[k] - R[k] * Rpp[k];
        const Real den = std::pow(R[k] * R[k] + Rp[k] * Rp[k], 1.5);
        kappa[k] = num / den;
    }
    return kappa;
}

Real tie_tolerance(const BoundaryGraph& a, const BoundaryGraph& b) {
    return 1e-12 * std::max({1.0, a.eta.lpNorm<Eigen::Infinity>(), b.eta.lpNorm<Eigen::Infinity>()});
}

IntersectionGraph intersection_graph(const BoundaryGraph& a, const BoundaryGraph& b) {
    if (a.n_theta() != b.n_theta())
        throw GridMismatch("intersection of graphs on different node counts");
    const Real tol = tie_tolerance(a, b);
    Vec eta = a.eta.cwiseMin(b.eta);
    std::vector<RegionTag> tags(a.n_theta());
    for (int k = 0; k < a.n_theta(); ++k) {
        if (a.eta[k] < b.eta[k] - tol)
            tags[k] = RegionTag::A;
        else if (b.eta[k] < a.eta[k] - tol)
            tags[k] = RegionTag::Ah;
        else
            tags[k] = RegionTag::Common;
    }
    return {BoundaryGraph(std::move(eta), a.collar_eps, a.collar_delta), std::move(tags)};
}

Real boundary_sobolev(const BoundaryScalar& f, Real s) { return sobolev_norm_theta(f, s); }

namespace {

// Cumulative arclength at nodes, rectangle rule (spectrally accurate for
// periodic speed).  s[0] = 0.
Vec cumulative_arclength(const BoundaryGraph& g) {
    Vec sp = g.speed();
    const Real dtheta = 2.0 * std::acos(-1.0) / g.n_theta();
    Vec s(g.n_theta());
    s[0] = 0.0;
    for (int k = 1; k < g.n_theta(); ++k) s[k] = s[k - 1] + 0.5 * dtheta * (sp[k - 1] + sp[k]);
    return s;
}

Real pairwise_holder_seminorm(const BoundaryScalar& f, const BoundaryGraph& g, Real alpha) {
    const int n = g.n_theta();
    Vec s = cumulative_arclength(g);
    const Real L = g.length();
    Real best = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Real d = std::abs(s[i] - s[j]);
            d = std::min(d, L - d);
            if (d <= 0.0) continue;
            best = std::max(best, std::abs(f[i] - f[j]) / std::pow(d, alpha));
        }
    return best;
}

}  // namespace

Real boundary_holder(const BoundaryScalar& f, const BoundaryGraph& g, Real alpha) {
    if (f.size() != g.n_theta()) throw GridMismatch("boundary data size");
    return f.lpNorm<Eigen::Infinity>() + pairwise_holder_seminorm(f, g, alpha);
}

Real boundary_lipschitz(const BoundaryScalar& f, const BoundaryGraph& g) {
    return boundary_holder(f, g, 1.0);
}

Real besov_holder(const BoundaryScalar& f, Real alpha) {
    const int n = static_cast<int>(f.size());
    Real out = lp_block(f, 0).lpNorm<Eigen::Infinity>();
    for (int j = 1; j <= lp_max_block(n); ++j) {
        const Real amp = lp_block(f, j).lpNorm<Eigen::Infinity>();
        out = std::max(out, std::pow(2.0, alpha * j) * amp);
    }
    return out;
}

Real boundary_integrate(const BoundaryScalar& f, const BoundaryGraph& g) {
    if (f.size() != g.n_theta()) throw GridMismatch("boundary data size");
    const Real dtheta = 2.0 * std::acos(-1.0) / g.n_theta();
    return (f.array() * g.speed().array()).sum() * dtheta;
}

Real collar_seminorm(const BoundaryGraph& g) {
    Vec ep = deriv_theta(g.eta);
    const int n = g.n_theta();
    Real out = 0.0;
    for (int j = 1; j <= lp_max_block(n); ++j)
        out = std::max(out, std::pow(2.0, g.collar_eps * j) * lp_block(ep, j).lpNorm<Eigen::Infinity>());
    return out;
}

bool in_collar(const BoundaryGraph& g) { return collar_seminorm(g) < g.collar_delta; }

Real holder_c1(const BoundaryGraph& g, Real alpha) {
    Vec ep = deriv_theta(g.eta);
    return g.eta.lpNorm<Eigen::Infinity>() + ep.lpNorm<Eigen::Infinity>() +
           pairwise_holder_seminorm(ep, g, alpha);
}

namespace {

// Does every ball of radius r centered at a node cut the curve in a single
// arc that is a graph over the tangent line at the center?
bool single_graph_at_scale(const Mat2X& p, const Mat2X& t_unit, Real r) {
    const int n = static_cast<int>(p.cols());
    for (int i = 0; i < n; ++i) {
        const Vec2 c = p.col(i);
        // contiguous arc through i inside the ball
        int lo = 0, hi = 0;
        while (hi < n / 2 && (p.col((i + hi + 1) % n) - c).norm() < r) ++hi;
        while (lo < n / 2 && (p.col((i - lo - 1 + 2 * n) % n) - c).norm() < r) ++lo;
        if (lo + hi + 1 >= n) return false;  // ball swallows the whole curve
        // no second sheet: nodes outside the arc must stay outside the ball
        for (int q = hi + 1; q < n - lo; ++q)
            if ((p.col((i + q) % n) - c).norm() < r) return false;
        // graph property: chord projections on the center tangent are monotone
        const Vec2 ti = t_unit.col(i);
        for (int q = -lo; q < hi; ++q) {
            const Vec2 a = p.col((i + q + n) % n), b = p.col((i + q + 1 + n) % n);
            if ((b - a).dot(ti) <= 0.0) return false;
        }
    }
    return true;
}

}  // namespace

Real thickness(const BoundaryGraph& g) {
    Mat2X p = g.points();
    Mat2X t = g.tangents();
    for (int k = 0; k < g.n_theta(); ++k) t.col(k).normalize();
    Real best = 0.0;
    for (Real r = 0.05; r < 4.0; r *= 1.05) {
        if (single_graph_at_scale(p, t, r))
            best = r;
        else
            break;
    }
    if (best == 0.0) throw StarShapeViolation("no positive graph scale found");
    return best;
}

Real enclosed_area(const BoundaryGraph& g) {
    const Real dtheta = 2.0 * std::acos(-1.0) / g.n_theta();
    return 0.5 * g.radius().array().square().sum() * dtheta;
}

}  // namespace droplet

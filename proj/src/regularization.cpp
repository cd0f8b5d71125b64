#include "droplet/regularization.hpp"

#include <cmath>
#include <vector>

#include "droplet/circle.hpp"

namespace droplet {

namespace {

void gauss_legendre(int n, Vec& x, Vec& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        Real t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            Real p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const Real dp = n * (t * p1 - p0) / (t * t - 1.0);
            const Real dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        Real p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const Real dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

// Density (sum_m c_m u^{step*m}) * (1-u^2)^p on [-1,1]; step 2 for the even
// (lateral) factor, 1 for the one-sided (radial) factor whose moments are
// taken about the shifted origin u -> shift_ratio + u.
struct Factor {
    Vec nodes, weights, coef;
    int p, step;

    Real density(Real u) const {
        Real poly = 0;
        for (int m = 0; m < coef.size(); ++m) poly += coef[m] * std::pow(u, step * m);
        return poly * std::pow(1.0 - u * u, p);
    }
};

Factor solve_factor(Real offset, int n_moments, int step, int p, int n_nodes) {
    Vec x, gw;
    gauss_legendre(n_nodes, x, gw);
    const int nb = n_moments / step + 1;
    Mat A(nb, nb);
    Vec rhs = Vec::Zero(nb);
    rhs[0] = 1.0;
    for (int k = 0; k < nb; ++k)
        for (int m = 0; m < nb; ++m) {
            Real acc = 0;
            for (int i = 0; i < n_nodes; ++i)
                acc += gw[i] * std::pow(1.0 - x[i] * x[i], p) * std::pow(x[i], step * m) *
                       std::pow(offset + x[i], step * k);
            A(k, m) = acc;
        }
    Factor f;
    f.p = p;
    f.step = step;
    f.coef = A.fullPivLu().solve(rhs);
    f.nodes = x;
    f.weights.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) f.weights[i] = gw[i] * f.density(x[i]);
    return f;
}

// Batched interpolation of chart fields at scattered points: per-row Fourier
// amplitudes once, then a barycentric-cardinal GEMM per chunk plus an
// angular recurrence per point.  Matches eval_xy to machine precision at a
// fraction of its cost for large batches.
struct Sampler {
    const DiskChart* chart;
    Mat amp_cos, amp_sin;  // n_rho x (M+1)*n_comp
    int M, n_comp;
    Vec eta_a, eta_b;
    int eta_m;
    Real band;

    Sampler(const std::vector<const Mat*>& comps, const DiskChart& c) : chart(&c) {
        band = c.extrapolation_band();
        const int nr = c.n_rho(), half = c.n_theta() / 2;
        n_comp = static_cast<int>(comps.size());
        auto [ea, eb] = cos_sin_amplitudes(c.gamma.eta);
        eta_m = 0;
        for (int m = 1; m < ea.size(); ++m)
            if (std::abs(ea[m]) > 1e-14 || std::abs(eb[m]) > 1e-14) eta_m = m;
        eta_a = ea.head(eta_m + 1);
        eta_b = eb.head(eta_m + 1);

        Real scale = 0;
        for (const Mat* v : comps) scale = std::max(scale, v->cwiseAbs().maxCoeff());
        if (scale == 0) scale = 1.0;
        Mat ac(nr, (half + 1) * n_comp), as(nr, (half + 1) * n_comp);
        M = 0;
        for (int cc = 0; cc < n_comp; ++cc)
            for (int i = 0; i < nr; ++i) {
                auto [a, b] = cos_sin_amplitudes(comps[cc]->row(i).transpose());
                ac.block(i, cc * (half + 1), 1, half + 1) = a.transpose();
                as.block(i, cc * (half + 1), 1, half + 1) = b.transpose();
                for (int m = half; m > M; --m)
                    if (std::abs(a[m]) > 1e-14 * scale || std::abs(b[m]) > 1e-14 * scale) {
                        M = m;
                        break;
                    }
            }
        amp_cos.resize(nr, (M + 1) * n_comp);
        amp_sin.resize(nr, (M + 1) * n_comp);
        for (int cc = 0; cc < n_comp; ++cc) {
            amp_cos.block(0, cc * (M + 1), nr, M + 1) = ac.block(0, cc * (half + 1), nr, M + 1);
            amp_sin.block(0, cc * (M + 1), nr, M + 1) = as.block(0, cc * (half + 1), nr, M + 1);
        }
    }

    // pts 2 x P -> out P x n_comp
    void eval(const Mat& pts, Mat& out) const {
        const int P = static_cast<int>(pts.cols());
        const int nr = chart->n_rho();
        const Vec& nodes = chart->radial.nodes;
        const Vec& bw = chart->radial.bary_w;
        out.resize(P, n_comp);
        constexpr int kChunk = 1024;
        Mat card(kChunk, nr), mcos, msin;
        Vec cth(kChunk), sth(kChunk);
        for (int p0 = 0; p0 < P; p0 += kChunk) {
            const int nc = std::min(kChunk, P - p0);
            for (int p = 0; p < nc; ++p) {
                const Real X = pts(0, p0 + p), Y = pts(1, p0 + p);
                const Real r = std::hypot(X, Y);
                const Real th = std::atan2(Y, X);
                const Real c1 = std::cos(th), s1 = std::sin(th);
                Real R = 1.0 + eta_a[0];
                Real cm = c1, sm = s1;
                for (int m = 1; m <= eta_m; ++m) {
                    R += eta_a[m] * cm + eta_b[m] * sm;
                    const Real cn = cm * c1 - sm * s1;
                    sm = sm * c1 + cm * s1;
                    cm = cn;
                }
                const Real rho = r / R;
                if (rho > 1.0 + band)
                    throw DomainNotContained("sample point outside the source chart");
                bool on_node = false;
                for (int i = 0; i < nr; ++i)
                    if (std::abs(rho - nodes[i]) < 1e-14) {
                        card.row(p).setZero();
                        card(p, i) = 1.0;
                        on_node = true;
                        break;
                    }
                if (!on_node) {
                    Real denom = 0;
                    for (int i = 0; i < nr; ++i) {
                        const Real t = bw[i] / (rho - nodes[i]);
                        card(p, i) = t;
                        denom += t;
                    }
                    card.row(p) /= denom;
                }
                cth[p] = c1;
                sth[p] = s1;
            }
            mcos.noalias() = card.topRows(nc) * amp_cos;
            msin.noalias() = card.topRows(nc) * amp_sin;
            for (int p = 0; p < nc; ++p) {
                const Real c1 = cth[p], s1 = sth[p];
                for (int cc = 0; cc < n_comp; ++cc) {
                    const int base = cc * (M + 1);
                    Real acc = mcos(p, base);
                    Real cm = c1, sm = s1;
                    for (int m = 1; m <= M; ++m) {
                        acc += mcos(p, base + m) * cm + msin(p, base + m) * sm;
                        const Real cn = cm * c1 - sm * s1;
                        sm = sm * c1 + cm * s1;
                        cm = cn;
                    }
                    out(p0 + p, cc) = acc;
                }
            }
        }
    }
};

// Shared core: footprint-average each component of u onto the target grid.
void mollify_core(const std::vector<const Mat*>& comps, const DiskChart& src, int j,
                  const DiskChart& tgt, const MomentKernel& k, std::vector<Mat>& out) {
    const Real scale = std::ldexp(1.0, -j);

    // Feasibility: source slope bound, then target excursion beyond source.
    const Vec rs = src.gamma.radius();
    const Vec rps = src.gamma.radius_dtheta();
    const Real lip = (rps.array().abs() / rs.array()).maxCoeff();
    const Real clear = k.clearance(lip);
    if (clear <= 0)
        throw EnlargementTooLarge("kernel footprint cannot stay inside a domain with slope " +
                                  std::to_string(lip));
    const Vec tgt_r = tgt.gamma.radius();
    const Vec src_r_at_tgt = trig_eval(src.gamma.eta, tgt.gamma.thetas()).array() + 1.0;
    const Real gap = (tgt_r - src_r_at_tgt).maxCoeff();
    if (gap > clear * scale)
        throw EnlargementTooLarge("target boundary exceeds source by " + std::to_string(gap) +
                                  ", more than the kernel reach " + std::to_string(clear * scale));

    Sampler sampler(comps, src);
    const int nr = tgt.n_rho(), nt = tgt.n_theta();
    const int Q = static_cast<int>(k.weights().size());
    const Vec thetas = tgt.gamma.thetas();
    Mat pts(2, static_cast<long>(nr) * nt * Q);
    long idx = 0;
    for (int kk = 0; kk < nt; ++kk) {
        const Real ct = std::cos(thetas[kk]), st = std::sin(thetas[kk]);
        for (int i = 0; i < nr; ++i) {
            const Real X = tgt.x(i, kk), Y = tgt.y(i, kk);
            for (int q = 0; q < Q; ++q, ++idx) {
                const Real a = k.offsets()(0, q), b = k.offsets()(1, q);
                pts(0, idx) = X - scale * (a * ct - b * st);
                pts(1, idx) = Y - scale * (a * st + b * ct);
            }
        }
    }
    Mat vals;
    try {
        sampler.eval(pts, vals);
    } catch (const DomainNotContained& e) {
        throw EnlargementTooLarge(std::string("footprint sample escaped the source domain: ") +
                                  e.what());
    }
    out.assign(comps.size(), Mat(nr, nt));
    const Vec& W = k.weights();
    for (size_t cc = 0; cc < comps.size(); ++cc) {
        idx = 0;
        for (int kk = 0; kk < nt; ++kk)
            for (int i = 0; i < nr; ++i, idx += Q)
                out[cc](i, kk) = W.dot(vals.col(cc).segment(idx, Q));
    }
}

}  // namespace

MomentKernel::MomentKernel(int order, Real width, Real shift_ratio, Real lateral_frac)
    : order_(order), width_(width), lateral_(lateral_frac * width), shift_(shift_ratio * width) {
    if (order < 2 || order % 2 != 0) throw ConfigError("moment order must be even and >= 2");
    if (width <= 0 || lateral_frac <= 0) throw ConfigError("kernel widths must be positive");
    if (shift_ratio <= 1.0)
        throw ConfigError("shift ratio must exceed 1 so the footprint stays one-sided");

    const int nf = 2 * order + 4, ng = 4 * order;
    const Factor fr = solve_factor(shift_ratio, order, 1, order, nf);
    const Factor fl = solve_factor(0.0, order, 2, order, ng);

    const int Q = nf * ng;
    off_.resize(2, Q);
    w_.resize(Q);
    int q = 0;
    for (int i = 0; i < nf; ++i)
        for (int l = 0; l < ng; ++l, ++q) {
            off_(0, q) = width_ * (shift_ratio + fr.nodes[i]);
            off_(1, q) = lateral_ * fl.nodes[l];
            w_[q] = fr.weights[i] * fl.weights[l];
        }
    sum_abs_w_ = w_.cwiseAbs().sum();

    // Defects measured on an independent refined rule (the densities are
    // polynomials, so both rules are exact; this checks the construction,
    // not the discretization).
    Vec xf, wf, xl, wl;
    gauss_legendre(2 * nf, xf, wf);
    gauss_legendre(2 * ng, xl, wl);
    Vec mom_r = Vec::Zero(order + 1), mom_l = Vec::Zero(order + 1);
    for (int i = 0; i < 2 * nf; ++i) {
        const Real d = wf[i] * fr.density(xf[i]);
        for (int a = 0; a <= order; ++a) mom_r[a] += d * std::pow(width_ * (shift_ratio + xf[i]), a);
    }
    for (int i = 0; i < 2 * ng; ++i) {
        const Real d = wl[i] * fl.density(xl[i]);
        for (int a = 0; a <= order; ++a) mom_l[a] += d * std::pow(lateral_ * xl[i], a);
    }
    mass_defect_ = std::abs(mom_r[0] * mom_l[0] - 1.0);
    moment_defect_ = 0;
    for (int a = 0; a <= order; ++a)
        for (int b = 0; a + b <= order; ++b) {
            if (a == 0 && b == 0) continue;
            moment_defect_ = std::max(moment_defect_, std::abs(mom_r[a] * mom_l[b]));
        }
}

Real MomentKernel::support_radius() const { return std::hypot(width_, lateral_); }

Real MomentKernel::clearance(Real lip) const {
    const Real c = 1.0 / std::sqrt(1.0 + lip * lip);
    const Real s = lip * c;
    return (shift_ - width_) * c - lateral_ * s;
}

Field mollify(const Field& u, int j, ChartPtr target, const MomentKernel& k) {
    std::vector<const Mat*> comps{&u.v};
    std::vector<Mat> out;
    mollify_core(comps, *u.chart, j, *target, k, out);
    return Field(target, std::move(out[0]));
}

VectorField mollify(const VectorField& u, int j, ChartPtr target, const MomentKernel& k) {
    std::vector<const Mat*> comps{&u.x.v, &u.y.v};
    std::vector<Mat> out;
    mollify_core(comps, *u.chart(), j, *target, k, out);
    return VectorField{Field(target, std::move(out[0])), Field(target, std::move(out[1]))};
}

VectorField div_free_regularize(const VectorField& v, int j, const DirichletSolver& solver,
                                const MomentKernel& k, Real div_tol) {
    VectorField w = mollify(v, j, solver.chart(), k);
    Field dv = divergence(w);
    if (dv.v.cwiseAbs().maxCoeff() < div_tol) return w;
    const Field q = solver.solve(dv, BoundaryScalar::Zero(solver.chart()->n_theta()));
    const VectorField gq = gradient(q);
    return VectorField{w.x - gq.x, w.y - gq.y};
}

VectorField div_free_regularize(const VectorField& v, int j, ChartPtr target,
                                const MomentKernel& k, Real div_tol) {
    return div_free_regularize(v, j, DirichletSolver(target), k, div_tol);
}

BoundaryScalar lp_project_circle(const BoundaryScalar& f, int j, LpBand band) {
    if (j < 0) throw ConfigError("dyadic index must be >= 0");
    const int top = lp_max_block(static_cast<int>(f.size()));
    switch (band) {
        case LpBand::Block:
            return lp_block(f, j);
        case LpBand::Low:
            if (j >= top) return f;  // every grid mode already inside: identity, bitwise
            return lp_low(f, j);
        case LpBand::High:
            if (j >= top) return Vec::Zero(f.size());
            return f - lp_low(f, j);
    }
    throw ConfigError("unknown band selector");
}

BoundaryGraph parabolic_smooth(const BoundaryGraph& g, Real eps, Real c_margin) {
    if (eps <= 0) throw ConfigError("parabolic smoothing needs eps > 0");
    const Vec smoothed = heat_smooth(g.eta, eps * eps);
    const Real overshoot = std::max(0.0, (smoothed - g.eta).maxCoeff());
    const Real C = overshoot / (eps * eps) + c_margin;
    return BoundaryGraph(smoothed.array() - C * eps * eps, g.collar_eps, g.collar_delta);
}

}  // namespace droplet

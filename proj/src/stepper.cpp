#include "droplet/stepper.hpp"

#include <cmath>
#include <sstream>

#include "droplet/boundary_geometry.hpp"
#include "droplet/circle.hpp"

namespace droplet {

namespace {

constexpr Real kPi = 3.14159265358979323846;

// Store a state without its operator caches (a trajectory of dense
// factorizations would dwarf the grid data).
FluidState slim_state(const FluidState& s, const StepConfig& cfg) {
    Real tol = std::max(cfg.div_tol, 2.0 * s.div_max());
    return FluidState(s.velocity(), s.gravity(), tol, std::nullopt);
}

std::string trip_detail(TripReason r, const ControlReport& c, const StepConfig& cfg,
                        Real b_int) {
    std::ostringstream os;
    switch (r) {
        case TripReason::TaylorSign:
            os << "min a = " << c.min_a << " below floor " << cfg.taylor_floor;
            break;
        case TripReason::Thickness:
            os << "thickness " << c.thickness << " below " << cfg.thickness_min;
            break;
        case TripReason::ControlA:
            os << "A = " << c.a_sharp << " above " << cfg.a_max;
            break;
        case TripReason::ControlB:
            os << "int B dt = " << b_int << " above budget " << cfg.b_budget;
            break;
        case TripReason::CollarExit:
            os << "graph left the collar";
            break;
        default:
            os << "stopped";
    }
    return os.str();
}

}  // namespace

int StepConfig::j_half() const {
    if (j_half_override) return *j_half_override;
    return std::max(0, static_cast<int>(std::lround(-0.5 * std::log2(eps))));
}

void StepConfig::validate(const DiskChart& chart) const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
    if (max_steps <= 0) throw ConfigError("max_steps must be positive");
    if (div_tol <= 0.0) throw ConfigError("div_tol must be positive");
    const Vec& rn = chart.radial.nodes;
    Real hr = rn[0];
    for (int i = 1; i < chart.n_rho(); ++i) hr = std::min(hr, rn[i] - rn[i - 1]);
    Real rmin = 1.0 + chart.gamma.eta.minCoeff();
    Real ht = 2.0 * kPi / chart.n_theta() * rmin;
    Real h = std::min(hr, ht);
    if (eps < 4.0 * h * h) {
        std::ostringstream os;
        os << "eps = " << eps << " below the grid noise floor 4 h^2 = " << 4.0 * h * h;
        throw ConfigError(os.str());
    }
}

FluidState step_domain_reg(const FluidState& s, const StepConfig& cfg, StepReport* rep) {
    const BoundaryGraph& g0 = s.gamma();
    BoundaryGraph ge = parabolic_smooth(g0, cfg.eps, cfg.c_margin);
    Vec diff = ge.eta - g0.eta;
    if (diff.maxCoeff() > 1e-12)
        throw StepFailure("smoothed graph is not contained in the original");
    if (rep)
        rep->domain_change_c1 =
            diff.cwiseAbs().maxCoeff() + deriv_theta(diff).cwiseAbs().maxCoeff();
    ChartPtr ce = make_chart(ge, s.chart()->n_rho());
    VectorField vr = restrict_vector(s.velocity(), ce);
    return FluidState(vr, s.gravity(), cfg.div_tol, std::nullopt);
}

FluidState step_velocity_reg(const FluidState& s, const StepConfig& cfg, StepReport* rep) {
    const VectorField& v = s.velocity();
    const DtNOperator& N = s.dtn();
    BoundaryScalar vn = normal_trace(v);
    Real flux = N.arc_w.dot(vn);
    Real scale = 1.0 + vn.cwiseAbs().maxCoeff();
    if (std::abs(flux) > cfg.mean_tol * scale) {
        std::ostringstream os;
        os << "net boundary flux " << flux << " exceeds tolerance";
        throw NonzeroMean(os.str());
    }
    if (rep) rep->flux_mean = flux / N.arc_w.sum();

    const Real lcut = cfg.lambda_cut();
    auto passthrough = [&]() {
        FluidState out(v, s.gravity(), cfg.div_tol, std::nullopt);
        out.share_elliptic(s.solver_ptr(), s.dtn_ptr());
        return out;
    };
    // When every resolved frequency sits below the cutoff the projection is
    // exactly zero on the discrete spectrum; skip the mollification.
    if (N.lambda.maxCoeff() <= lcut) return passthrough();

    VectorField sm = div_free_regularize(v, cfg.j_half(), s.solver(), cfg.kernel);
    BoundaryScalar wn = vn - normal_trace(sm);
    BoundaryScalar hi = wn - dtn_spectral_projection(N, wn, lcut);
    hi.array() -= N.arc_w.dot(hi) / N.arc_w.sum();
    if (hi.cwiseAbs().maxCoeff() < 1e-13 * scale) return passthrough();

    BoundaryScalar phi = dtn_inverse_on_mean_zero(N, hi);
    Field u = s.solver().harmonic_extension(phi);
    VectorField corr = gradient(u);
    if (rep)
        rep->velocity_change = std::max(corr.x.v.cwiseAbs().maxCoeff(),
                                        corr.y.v.cwiseAbs().maxCoeff());
    FluidState out(v - corr, s.gravity(), cfg.div_tol, std::nullopt);
    out.share_elliptic(s.solver_ptr(), s.dtn_ptr());
    return out;
}

BoundaryGraph transport_graph(const BoundaryGraph& g, const Mat2X& moved) {
    const int n = g.n_theta();
    if (static_cast<int>(moved.cols()) != n)
        throw GridMismatch("moved boundary has wrong node count");
    Vec xs = moved.row(0).transpose();
    Vec ys = moved.row(1).transpose();
    Vec dxs = deriv_theta(xs), dys = deriv_theta(ys);

    // The cloud is a radial graph iff the interpolated curve keeps positive
    // radius and positive angular speed x y' - y x'.
    const int nd = 4 * n;
    Vec sd = Vec::LinSpaced(nd, 0.0, 2.0 * kPi * (nd - 1) / nd);
    Vec xd = trig_eval(xs, sd), yd = trig_eval(ys, sd);
    Vec dxd = trig_eval(dxs, sd), dyd = trig_eval(dys, sd);
    for (int i = 0; i < nd; ++i) {
        Real r2 = xd[i] * xd[i] + yd[i] * yd[i];
        Real ang = xd[i] * dyd[i] - yd[i] * dxd[i];
        if (r2 <= 0.0 || ang <= 0.0)
            throw StarShapeViolation("transported boundary is not a radial graph");
    }

    // Ray casting: for each reference angle, Newton on the signed cross
    // product of the curve point against the ray direction.
    Vec eta(n);
    for (int k = 0; k < n; ++k) {
        const Real theta = 2.0 * kPi * k / n;
        const Real ct = std::cos(theta), st = std::sin(theta);
        Real sp = theta;
        Real x = 0, y = 0;
        bool done = false;
        for (int it = 0; it < 50; ++it) {
            x = trig_eval(xs, sp);
            y = trig_eval(ys, sp);
            Real h = x * st - y * ct;
            Real r = std::hypot(x, y);
            if (std::abs(h) <= 1e-14 * std::max(1.0, r)) {
                done = true;
                break;
            }
            Real hp = trig_eval(dxs, sp) * st - trig_eval(dys, sp) * ct;
            if (std::abs(hp) < 1e-14)
                throw StarShapeViolation("ray tangent to transported boundary");
            sp -= h / hp;
        }
        if (!done) throw StarShapeViolation("ray casting failed to converge");
        Real r = x * ct + y * st;
        if (r <= 0.0) throw StarShapeViolation("ray hit the transported boundary backwards");
        eta[k] = r - 1.0;
    }
    return BoundaryGraph(eta, g.collar_eps, g.collar_delta);
}

FluidState step_euler_transport(const FluidState& s, const StepConfig& cfg, StepReport* rep) {
    const Real eps = cfg.eps;
    const Real grav = s.gravity();
    const VectorField& v = s.velocity();
    const Field& p = s.pressure();
    VectorField gp = gradient(p);

    // Move the boundary nodes with the flow and re-fit the radial graph.
    Mat2X moved = s.gamma().points();
    moved.row(0) += eps * v.x.boundary_trace().transpose();
    moved.row(1) += eps * v.y.boundary_trace().transpose();
    BoundaryGraph g1 = transport_graph(s.gamma(), moved);
    ChartPtr c1 = make_chart(g1, s.chart()->n_rho());

    // Pull every new grid node back through the eps-flow: solve x = y - eps v(x)
    // for all nodes at once by fixed-point iteration.
    const int nr = c1->n_rho(), nt = c1->n_theta();
    const int P = nr * nt;
    Mat2X tgt(2, P);
    tgt.row(0) = Eigen::Map<const Vec>(c1->x.data(), P).transpose();
    tgt.row(1) = Eigen::Map<const Vec>(c1->y.data(), P).transpose();
    Mat2X xs = tgt;
    const Real itol = 1e-12 * (1.0 + tgt.cwiseAbs().maxCoeff());
    int iters = 0;
    try {
        bool converged = false;
        for (iters = 1; iters <= 60; ++iters) {
            Vec ux = eval_xy(v.x, xs), uy = eval_xy(v.y, xs);
            Mat2X nxt(2, P);
            nxt.row(0) = tgt.row(0) - eps * ux.transpose();
            nxt.row(1) = tgt.row(1) - eps * uy.transpose();
            Real delta = (nxt - xs).cwiseAbs().maxCoeff();
            xs = nxt;
            if (delta < itol) {
                converged = true;
                break;
            }
        }
        if (!converged) throw InversionFailure("flow pullback did not converge");
    } catch (const DomainNotContained& e) {
        throw InversionFailure(std::string("flow pullback left the domain: ") + e.what());
    }

    // Transported velocity with the pressure/gravity update, sampled on the
    // new chart, then projected back to divergence-free.
    Vec ux = eval_xy(v.x, xs), uy = eval_xy(v.y, xs);
    Vec px = eval_xy(gp.x, xs), py = eval_xy(gp.y, xs);
    Vec wx = ux - eps * px;
    Vec wy = uy - eps * (py.array() + grav).matrix();
    VectorField vt(Field(c1, Eigen::Map<const Mat>(wx.data(), nr, nt)),
                   Field(c1, Eigen::Map<const Mat>(wy.data(), nr, nt)));
    auto solver1 = std::make_shared<const DirichletSolver>(c1);
    Field dv = divergence(vt);
    Real vsup = std::max(vt.x.v.cwiseAbs().maxCoeff(), vt.y.v.cwiseAbs().maxCoeff());
    VectorField v1 = vt;
    if (dv.v.cwiseAbs().maxCoeff() > 1e-13 * (1.0 + vsup)) {
        Field q = solver1->solve(dv, BoundaryScalar::Zero(nt));
        v1 = vt - gradient(q);
    }
    FluidState out(v1, grav, cfg.div_tol, std::nullopt);
    out.share_elliptic(solver1, nullptr);

    if (rep) {
        rep->invert_iters = iters;
        Real a0 = enclosed_area(s.gamma());
        rep->volume_drift = std::abs(enclosed_area(g1) - a0) / a0;

        // Euler update residual v1 - (v - eps (v.grad v + grad p + g e2)) on
        // the overlap of the old and new domains, with first derivatives.
        VectorField adv = advect(v, v);
        Field a0x = v.x - eps * (adv.x + gp.x);
        Field a0y = v.y - eps * (adv.y + gp.y);
        a0y.v.array() -= eps * grav;
        VectorField ga0x = gradient(a0x), ga0y = gradient(a0y);
        VectorField gv1x = gradient(v1.x), gv1y = gradient(v1.y);

        const Vec& eta0 = s.gamma().eta;
        std::vector<int> keep;
        keep.reserve(P);
        for (int q = 0; q < P; ++q) {
            Real r = std::hypot(tgt(0, q), tgt(1, q));
            Real th = std::atan2(tgt(1, q), tgt(0, q));
            if (r <= 1.0 + trig_eval(eta0, th)) keep.push_back(q);
        }
        Mat2X pin(2, keep.size());
        for (size_t i = 0; i < keep.size(); ++i) pin.col(i) = tgt.col(keep[i]);
        Vec rx = eval_xy(a0x, pin), ry = eval_xy(a0y, pin);
        Vec gxx = eval_xy(ga0x.x, pin), gxy = eval_xy(ga0x.y, pin);
        Vec gyx = eval_xy(ga0y.x, pin), gyy = eval_xy(ga0y.y, pin);
        Real r0 = 0, r1 = 0;
        for (size_t i = 0; i < keep.size(); ++i) {
            int q = keep[i];
            int j = q % nr, k = q / nr;
            r0 = std::max(r0, std::abs(v1.x.v(j, k) - rx[i]));
            r0 = std::max(r0, std::abs(v1.y.v(j, k) - ry[i]));
            r1 = std::max(r1, std::abs(gv1x.x.v(j, k) - gxx[i]));
            r1 = std::max(r1, std::abs(gv1x.y.v(j, k) - gxy[i]));
            r1 = std::max(r1, std::abs(gv1y.x.v(j, k) - gyx[i]));
            r1 = std::max(r1, std::abs(gv1y.y.v(j, k) - gyy[i]));
        }
        rep->residual_c0 = r0;
        rep->residual_c1 = r0 + r1;
    }
    return out;
}

FluidState full_step(const FluidState& s, const StepConfig& cfg, StepReport& rep) {
    FluidState s1 = step_domain_reg(s, cfg, &rep);
    FluidState s2 = step_velocity_reg(s1, cfg, &rep);
    return step_euler_transport(s2, cfg, &rep);
}

TripReason monitor_state(const FluidState& s, const ControlReport& ctrl,
                         const StepConfig& cfg, Real b_integral) {
    if (cfg.taylor_floor > 0.0 && ctrl.min_a < cfg.taylor_floor)
        return TripReason::TaylorSign;
    if (ctrl.thickness < cfg.thickness_min) return TripReason::Thickness;
    if (ctrl.a_sharp > cfg.a_max) return TripReason::ControlA;
    if (b_integral > cfg.b_budget) return TripReason::ControlB;
    if (!in_collar(s.gamma())) return TripReason::CollarExit;
    // Star-shape loss cannot occur on a stored graph (enforced at
    // construction); during transport it surfaces as StarShapeViolation.
    return TripReason::None;
}

Trajectory run(const FluidState& init, const StepConfig& cfg, Real T,
               const std::function<void(const StepReport&)>& on_step) {
    cfg.validate(*init.chart());
    if (T < 0.0 || !std::isfinite(T)) throw ConfigError("horizon must be nonnegative");
    long want = static_cast<long>(std::ceil(T / cfg.eps - 1e-9));
    int n_steps = static_cast<int>(std::min<long>(want, cfg.max_steps));

    Trajectory traj;
    traj.dt = cfg.eps;
    traj.states.push_back(slim_state(init, cfg));
    FluidState cur(init);
    Real b_int = 0.0;
    for (int i = 0; i < n_steps; ++i) {
        ControlReport cpre = control_report(cur);
        TripReason tr = monitor_state(cur, cpre, cfg, b_int);
        if (tr != TripReason::None) {
            traj.trip = tr;
            traj.trip_step = i;
            traj.trip_message = trip_detail(tr, cpre, cfg, b_int);
            break;
        }
        StepReport rep;
        rep.t_pre = i * cfg.eps;
        rep.eps = cfg.eps;
        rep.control_pre = cpre;
        rep.energy_pre = energy_k(cur, cfg.k);
        std::optional<FluidState> next;
        try {
            next.emplace(full_step(cur, cfg, rep));
        } catch (const StarShapeViolation& e) {
            traj.trip = TripReason::StarShape;
            traj.trip_step = i;
            traj.trip_message = e.what();
            break;
        }
        rep.energy_post = energy_k(*next, cfg.k);
        rep.control_post = control_report(*next);
        rep.energy_ratio = rep.energy_post.e_k / rep.energy_pre.e_k;
        b_int += 0.5 * (rep.control_pre.b_sharp + rep.control_post.b_sharp) * cfg.eps;
        rep.b_integral = b_int;
        traj.reports.push_back(rep);
        traj.states.push_back(slim_state(*next, cfg));
        cur = std::move(*next);
        if (on_step) on_step(traj.reports.back());
    }
    if (traj.trip == TripReason::None && traj.steps() == n_steps) {
        ControlReport cfin = control_report(cur);
        TripReason tr = monitor_state(cur, cfin, cfg, b_int);
        if (tr != TripReason::None) {
            traj.trip = tr;
            traj.trip_step = n_steps;
            traj.trip_message = trip_detail(tr, cfin, cfg, b_int);
        }
    }
    return traj;
}

void require_clean(const Trajectory& t) {
    if (t.trip != TripReason::None)
        throw MonitorTrip(t.trip, "step " + std::to_string(t.trip_step) +
                                      (t.trip_message.empty() ? "" : ": " + t.trip_message));
}

}  // namespace droplet

#include "droplet/state_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace droplet {

namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

// Velocity Jacobian samples with the convention M(i,j) = d_i v_j, so that
// ((grad v)* w)_i = M(i,1) w_1 + M(i,2) w_2 matches the commutator
// [D_t, grad] g = -(grad v)* grad g.
struct Jac {
    Mat m11, m12, m21, m22;
};

Jac jacobian(const VectorField& v) {
    return {dx(v.x).v, dx(v.y).v, dy(v.x).v, dy(v.y).v};
}

Mat tr_sq(const Jac& j) {  // tr((grad v)^2)
    return (j.m11.array().square() + 2.0 * (j.m12.array() * j.m21.array()) +
            j.m22.array().square())
        .matrix();
}

Real sup_abs(const Mat& m) { return m.array().abs().maxCoeff(); }

// pointwise Frobenius norm of the Jacobian
Mat jac_norm(const Jac& j) {
    return (j.m11.array().square() + j.m12.array().square() + j.m21.array().square() +
            j.m22.array().square())
        .sqrt()
        .matrix();
}

Mat vec_norm(const VectorField& v) {
    return (v.x.v.array().square() + v.y.v.array().square()).sqrt().matrix();
}

}  // namespace

FluidState::FluidState(VectorField v, Real gravity, Real div_tol,
                       std::optional<Real> taylor_floor)
    : v_(std::move(v)), gravity_(gravity), div_tol_(div_tol), taylor_floor_(taylor_floor) {
    if (!v_.chart()) throw GridMismatch("fluid state needs velocity samples on a chart");
    if (gravity_ < 0.0) throw ConfigError("gravity must be nonnegative");
    div_max_ = sup_abs(divergence(v_).v);
    if (div_max_ >= div_tol_)
        throw ResidualTooLarge("velocity divergence " + std::to_string(div_max_) +
                               " exceeds tolerance " + std::to_string(div_tol_));
}

void FluidState::set_velocity(VectorField v) {
    if (!v.chart()) throw GridMismatch("fluid state needs velocity samples on a chart");
    if (v.chart() != v_.chart()) {
        solver_.reset();
        dtn_.reset();
    }
    v_ = std::move(v);
    div_max_ = sup_abs(divergence(v_).v);
    if (div_max_ >= div_tol_)
        throw ResidualTooLarge("velocity divergence " + std::to_string(div_max_) +
                               " exceeds tolerance " + std::to_string(div_tol_));
    p_.reset();
    a_.reset();
    dtp_.reset();
    dt_grad_p_.reset();
    dta_.reset();
    omega_.reset();
}

const DirichletSolver& FluidState::solver() const {
    if (!solver_) solver_ = std::make_shared<const DirichletSolver>(chart());
    return *solver_;
}

const DtNOperator& FluidState::dtn() const {
    if (!dtn_) dtn_ = std::make_shared<const DtNOperator>(assemble_dtn(solver()));
    return *dtn_;
}

std::shared_ptr<const DirichletSolver> FluidState::solver_ptr() const {
    solver();
    return solver_;
}

std::shared_ptr<const DtNOperator> FluidState::dtn_ptr() const {
    dtn();
    return dtn_;
}

void FluidState::share_elliptic(std::shared_ptr<const DirichletSolver> solver,
                                std::shared_ptr<const DtNOperator> dtn) {
    if (solver && solver->chart() != chart())
        throw GridMismatch("shared solver lives on a different chart");
    if (dtn && (dtn->gamma.n_theta() != gamma().n_theta() ||
                (dtn->gamma.eta - gamma().eta).norm() != 0.0))
        throw GridMismatch("shared DtN map lives on a different boundary");
    if (solver) solver_ = std::move(solver);
    if (dtn) dtn_ = std::move(dtn);
}

const Field& FluidState::pressure() const {
    if (!p_) {
        Jac j = jacobian(v_);
        Field rhs(chart(), -tr_sq(j));
        p_ = solver().solve(rhs, BoundaryScalar::Zero(gamma().n_theta()));
    }
    return *p_;
}

const BoundaryScalar& FluidState::taylor() const {
    if (!a_) {
        a_ = (-solver().normal_derivative(pressure())).eval();
        if (taylor_floor_ && a_->minCoeff() < *taylor_floor_)
            throw TaylorSignViolation("min a = " + std::to_string(a_->minCoeff()) +
                                      " below floor " + std::to_string(*taylor_floor_));
    }
    return *a_;
}

Real FluidState::min_taylor() const { return taylor().minCoeff(); }

const Field& FluidState::dt_pressure() const {
    if (!dtp_) {
        const Field& p = pressure();
        Jac j = jacobian(v_);
        Field px = dx(p), py = dy(p);
        Mat hxx = dx(px).v, hyy = dy(py).v;
        Mat hxy = 0.5 * (dx(py).v + dy(px).v);
        // 4 tr(H_p grad v) with symmetric Hessian
        Mat f = (4.0 * (hxx.array() * j.m11.array() + hxy.array() * (j.m12 + j.m21).array() +
                        hyy.array() * j.m22.array()))
                    .matrix();
        // 2 tr(M^3) = 2 (t^3 - 3 t det M) for 2x2 M
        Mat t = j.m11 + j.m22;
        Mat det = (j.m11.array() * j.m22.array() - j.m12.array() * j.m21.array()).matrix();
        f += 2.0 * (t.array().cube() - 3.0 * t.array() * det.array()).matrix();
        // (lap v) . grad p
        f += (laplacian(v_.x).v.array() * px.v.array() +
              laplacian(v_.y).v.array() * py.v.array())
                 .matrix();
        dtp_ = solver().solve(Field(chart(), f), BoundaryScalar::Zero(gamma().n_theta()));
    }
    return *dtp_;
}

const VectorField& FluidState::dt_grad_pressure() const {
    if (!dt_grad_p_) {
        const Field& p = pressure();
        const Field& q = dt_pressure();
        Jac j = jacobian(v_);
        Mat px = dx(p).v, py = dy(p).v;
        Mat gx = dx(q).v - (j.m11.array() * px.array() + j.m12.array() * py.array()).matrix();
        Mat gy = dy(q).v - (j.m21.array() * px.array() + j.m22.array() * py.array()).matrix();
        dt_grad_p_ = VectorField(Field(chart(), gx), Field(chart(), gy));
    }
    return *dt_grad_p_;
}

const BoundaryScalar& FluidState::dt_taylor() const {
    if (!dta_) {
        const VectorField& g = dt_grad_pressure();
        Mat2X n = outward_normal(gamma());
        BoundaryScalar gx = g.x.boundary_trace(), gy = g.y.boundary_trace();
        dta_ = (-(n.row(0).transpose().array() * gx.array() +
                  n.row(1).transpose().array() * gy.array()))
                   .matrix()
                   .eval();
    }
    return *dta_;
}

const Field& FluidState::vorticity() const {
    if (!omega_) omega_ = curl2d(v_);
    return *omega_;
}

Real energy_lin(const FluidState& state, const VectorField& w, const BoundaryScalar& s) {
    if (s.size() != state.gamma().n_theta()) throw GridMismatch("boundary data size");
    const BoundaryScalar& a = state.taylor();
    Real interior = 0.5 * (inner(w.x, w.x) + inner(w.y, w.y));
    Real surface =
        0.5 * boundary_integrate((a.array() * s.array().square()).matrix(), state.gamma());
    return interior + surface;
}

namespace {

// shared scaffolding for the two energies
struct EnergyParts {
    Real v_l2_sq, omega_sq;
    BoundaryScalar a, dta;
};

EnergyParts energy_parts(const FluidState& st, int k) {
    if (k < 3) throw ConfigError("energy order k must be >= 3, got " + std::to_string(k));
    if (k - 1 > kDefaultMMax)
        throw PowerTooHigh("energy order " + std::to_string(k) + " needs DtN power " +
                           std::to_string(k - 1) + " past the budget " +
                           std::to_string(kDefaultMMax));
    EnergyParts parts;
    parts.v_l2_sq =
        inner(st.velocity().x, st.velocity().x) + inner(st.velocity().y, st.velocity().y);
    Real om = interior_sobolev_norm(st.vorticity(), k - 1);
    parts.omega_sq = om * om;
    parts.a = st.taylor();
    parts.dta = st.dt_taylor();
    return parts;
}

Real grad_extension_sq(const FluidState& st, const BoundaryScalar& g, int power) {
    BoundaryScalar ng = apply_dtn_power(st.dtn(), g, power);
    Field h = st.solver().harmonic_extension(ng);
    VectorField grad = gradient(h);
    return inner(grad.x, grad.x) + inner(grad.y, grad.y);
}

}  // namespace

EnergyReport energy_k(const FluidState& state, int k) {
    EnergyParts parts = energy_parts(state, k);
    EnergyReport rep;
    rep.k = k;
    rep.v_l2_sq = parts.v_l2_sq;
    rep.omega_sq = parts.omega_sq;
    rep.w_l2_sq = grad_extension_sq(state, parts.dta, k - 2);
    BoundaryScalar sk = apply_dtn_power(state.dtn(), parts.a, k - 1);
    rep.surface_sq =
        boundary_integrate((parts.a.array() * sk.array().square()).matrix(), state.gamma());
    rep.e_lin = 0.5 * (rep.w_l2_sq + rep.surface_sq);
    rep.e_k = 1.0 + rep.v_l2_sq + rep.omega_sq + rep.e_lin;
    rep.e_k_modified = std::numeric_limits<Real>::quiet_NaN();
    return rep;
}

EnergyReport energy_k_modified(const FluidState& state, int k, Real a_floor) {
    EnergyReport rep = energy_k(state, k);
    const BoundaryScalar& a = state.taylor();
    if (a.minCoeff() <= a_floor)
        throw TaylorSignViolation("weighted energy needs min a > " + std::to_string(a_floor) +
                                  ", got " + std::to_string(a.minCoeff()));
    BoundaryScalar ainv_dta = (state.dt_taylor().array() / a.array()).matrix();
    Real grad_sq = grad_extension_sq(state, ainv_dta, k - 2);
    BoundaryScalar sk = apply_dtn_power(state.dtn(), a, k - 1);
    Real weighted_surf =
        boundary_integrate((sk.array().square() / a.array()).matrix(), state.gamma());
    rep.e_k_modified = 1.0 + rep.v_l2_sq + rep.omega_sq + grad_sq + weighted_surf;
    return rep;
}

Real conserved_energy(const FluidState& state) {
    Real kinetic =
        0.5 * (inner(state.velocity().x, state.velocity().x) +
               inner(state.velocity().y, state.velocity().y));
    Field height(state.chart(), state.chart()->y);
    return kinetic + state.gravity() * integrate(height);
}

namespace {

// max pairwise quotients |v(p) - v(q)| / |p - q|^alpha over the grid samples,
// evaluated at two exponents in one sweep
std::pair<Real, Real> velocity_holder(const FluidState& st, Real al1, Real al2) {
    const DiskChart& c = *st.chart();
    const Eigen::Index n = c.x.size();
    const Real* X = c.x.data();
    const Real* Y = c.y.data();
    const Real* VX = st.velocity().x.v.data();
    const Real* VY = st.velocity().y.v.data();
    Real q1 = 0.0, q2 = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const Real ddx = X[i] - X[j], ddy = Y[i] - Y[j];
            const Real d2 = ddx * ddx + ddy * ddy;
            if (d2 <= 0.0) continue;
            const Real dvx = VX[i] - VX[j], dvy = VY[i] - VY[j];
            const Real dv2 = dvx * dvx + dvy * dvy;
            if (dv2 <= 0.0) continue;
            const Real dv = std::sqrt(dv2);
            const Real ln_d = 0.5 * std::log(d2);
            q1 = std::max(q1, dv * std::exp(-al1 * ln_d));
            q2 = std::max(q2, dv * std::exp(-al2 * ln_d));
        }
    }
    return {q1, q2};
}

}  // namespace

ControlReport control_report(const FluidState& state) {
    const BoundaryGraph& g = state.gamma();
    Jac j = jacobian(state.velocity());
    const Real v_sup = vec_norm(state.velocity()).maxCoeff();
    const Real grad_v_sup = jac_norm(j).maxCoeff();
    const Real eps = g.collar_eps;
    auto [holder_half, holder_half_eps] = velocity_holder(state, 0.5, 0.5 + eps);

    ControlReport rep;
    rep.a_sharp = holder_half + besov_holder(g.eta, 1.0);
    rep.b_sharp = (v_sup + grad_v_sup) + besov_holder(deriv_theta(g.eta), 0.5);
    rep.a_eps = (v_sup + holder_half_eps) + holder_c1(g, eps);

    const Field& q = state.dt_pressure();
    Mat qgrad = (dx(q).v.array().square() + dy(q).v.array().square()).sqrt().matrix();
    const Real dtp_w1 = (q.v.array().abs() + qgrad.array()).maxCoeff();
    const Real v_w1 = (vec_norm(state.velocity()).array() + jac_norm(j).array()).maxCoeff();
    rep.b_diff = v_w1 + dtp_w1 + holder_c1(g, 0.5);

    rep.min_a = state.min_taylor();
    if (rep.min_a <= 0.0) {
        rep.b_lin = kInf;
    } else {
        rep.b_lin = (state.dt_taylor().array() / state.taylor().array()).abs().maxCoeff() +
                    grad_v_sup;
    }
    rep.thickness = thickness(g);
    return rep;
}

BoundaryScalar curvature_pressure_residual(const FluidState& state) {
    const BoundaryGraph& g = state.gamma();
    const Field& p = state.pressure();
    Jac j = jacobian(state.velocity());
    const int last = state.chart()->n_rho() - 1;
    // boundary trace of lap p straight from the pressure equation
    BoundaryScalar lap = -tr_sq(j).row(last).transpose();
    Field px = dx(p), py = dy(p);
    BoundaryScalar hxx = dx(px).boundary_trace();
    BoundaryScalar hyy = dy(py).boundary_trace();
    BoundaryScalar hxy = 0.5 * (dx(py).boundary_trace() + dy(px).boundary_trace());
    Mat2X n = outward_normal(g);
    Vec nx = n.row(0).transpose(), ny = n.row(1).transpose();
    BoundaryScalar hnn = (nx.array().square() * hxx.array() +
                          2.0 * nx.array() * ny.array() * hxy.array() +
                          ny.array().square() * hyy.array())
                             .matrix();
    const BoundaryScalar& a = state.taylor();
    return (mean_curvature(g).array() + (lap.array() - hnn.array()) / a.array()).matrix();
}

namespace {

// unit-speed data of a graph boundary at its nodes
struct BoundaryFrame {
    Mat2X pts, n, tau;
    Vec speed;
};

BoundaryFrame frame(const BoundaryGraph& g) {
    BoundaryFrame f;
    f.pts = g.points();
    f.n = outward_normal(g);
    f.speed = g.speed();
    Mat2X t = g.tangents();
    f.tau = (t.array().rowwise() / f.speed.transpose().array()).matrix();
    return f;
}

Vec sample_boundary(const std::function<Real(Real, Real)>& fn, const Mat2X& pts) {
    Vec out(pts.cols());
    for (Eigen::Index k = 0; k < pts.cols(); ++k) out[k] = fn(pts(0, k), pts(1, k));
    return out;
}

}  // namespace

MotionIdentityReport check_moving_identities(const std::vector<FluidState>& traj, Real dt,
                                             const std::function<Real(Real, Real)>& probe) {
    if (traj.size() < 3) throw GridMismatch("need at least three states along the trajectory");
    if (!(dt > 0.0)) throw ConfigError("time spacing must be positive");

    MotionIdentityReport rep{0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t mid = 1; mid + 1 < traj.size(); ++mid) {
        const FluidState& s0 = traj[mid - 1];
        const FluidState& s1 = traj[mid];
        const FluidState& s2 = traj[mid + 1];
        const ChartPtr& chart = s1.chart();
        const BoundaryGraph& g1 = s1.gamma();
        const int nt = g1.n_theta();
        BoundaryFrame f1 = frame(g1);

        // boundary particles seeded at the middle nodes, first-order paths
        BoundaryScalar vbx = s1.velocity().x.boundary_trace();
        BoundaryScalar vby = s1.velocity().y.boundary_trace();
        Mat2X fwd = f1.pts, bwd = f1.pts;
        fwd.row(0) += dt * vbx.transpose();
        fwd.row(1) += dt * vby.transpose();
        bwd.row(0) -= dt * vbx.transpose();
        bwd.row(1) -= dt * vby.transpose();
        Vec th2(nt), th0(nt);
        for (int k = 0; k < nt; ++k) {
            th2[k] = std::atan2(fwd(1, k), fwd(0, k));
            th0[k] = std::atan2(bwd(1, k), bwd(0, k));
        }

        // material derivative of the outward normal vs -((grad v)* n)^tangential
        Jac j = jacobian(s1.velocity());
        const int last = chart->n_rho() - 1;
        Vec m11 = j.m11.row(last).transpose(), m12 = j.m12.row(last).transpose();
        Vec m21 = j.m21.row(last).transpose(), m22 = j.m22.row(last).transpose();
        Mat2X n0 = outward_normal(s0.gamma()), n2 = outward_normal(s2.gamma());
        Vec n0x = n0.row(0).transpose(), n0y = n0.row(1).transpose();
        Vec n2x = n2.row(0).transpose(), n2y = n2.row(1).transpose();
        Mat2X dtn_fd(2, nt), dtn_formula(2, nt);
        for (int k = 0; k < nt; ++k) {
            dtn_fd(0, k) = (trig_eval(n2x, th2[k]) - trig_eval(n0x, th0[k])) / (2.0 * dt);
            dtn_fd(1, k) = (trig_eval(n2y, th2[k]) - trig_eval(n0y, th0[k])) / (2.0 * dt);
            const Real nx = f1.n(0, k), ny = f1.n(1, k);
            Real wx = m11[k] * nx + m12[k] * ny;
            Real wy = m21[k] * nx + m22[k] * ny;
            const Real wn = wx * nx + wy * ny;  // strip the normal part
            dtn_formula(0, k) = -(wx - wn * nx);
            dtn_formula(1, k) = -(wy - wn * ny);
        }
        rep.normal = std::max(rep.normal, (dtn_fd - dtn_formula).colwise().norm().maxCoeff());

        // probe traces on the three boundaries and its material derivative
        Vec fb0 = sample_boundary(probe, frame(s0.gamma()).pts);
        Vec fb1 = sample_boundary(probe, f1.pts);
        Vec fb2 = sample_boundary(probe, frame(s2.gamma()).pts);
        Vec fwd_vals = sample_boundary(probe, fwd);
        Vec bwd_vals = sample_boundary(probe, bwd);
        Vec dtf = (fwd_vals - bwd_vals) / (2.0 * dt);

        // commutator with the harmonic extension:
        //   D_t(H f) - H(D_t f)  vs  lap^{-1}(2 grad v : hess(H f) + grad(H f) . lap v)
        Field u0 = s0.solver().harmonic_extension(fb0);
        Field u1 = s1.solver().harmonic_extension(fb1);
        Field u2 = s2.solver().harmonic_extension(fb2);
        const Eigen::Index npts = chart->x.size();
        Mat2X pf(2, npts), pb(2, npts);
        pf.row(0) = Eigen::Map<const Vec>(chart->x.data(), npts).transpose() +
                    dt * Eigen::Map<const Vec>(s1.velocity().x.v.data(), npts).transpose();
        pf.row(1) = Eigen::Map<const Vec>(chart->y.data(), npts).transpose() +
                    dt * Eigen::Map<const Vec>(s1.velocity().y.v.data(), npts).transpose();
        pb.row(0) = 2.0 * Eigen::Map<const Vec>(chart->x.data(), npts).transpose() -
                    pf.row(0);
        pb.row(1) = 2.0 * Eigen::Map<const Vec>(chart->y.data(), npts).transpose() -
                    pf.row(1);
        Vec u_quot = (eval_xy(u2, pf) - eval_xy(u0, pb)) / (2.0 * dt);
        Field hdtf = s1.solver().harmonic_extension(dtf);
        Vec ext_fd = u_quot - Eigen::Map<const Vec>(hdtf.v.data(), npts);

        Field u1x = dx(u1), u1y = dy(u1);
        Mat hxx = dx(u1x).v, hyy = dy(u1y).v;
        Mat hxy = 0.5 * (dx(u1y).v + dy(u1x).v);
        Mat s0rhs = (2.0 * (j.m11.array() * hxx.array() +
                            (j.m12 + j.m21).array() * hxy.array() +
                            j.m22.array() * hyy.array()))
                        .matrix();
        s0rhs += (laplacian(s1.velocity().x).v.array() * u1x.v.array() +
                  laplacian(s1.velocity().y).v.array() * u1y.v.array())
                     .matrix();
        Field comm_h = s1.solver().solve(Field(chart, s0rhs), BoundaryScalar::Zero(nt));
        rep.extension = std::max(
            rep.extension,
            (ext_fd - Eigen::Map<const Vec>(comm_h.v.data(), npts)).lpNorm<Eigen::Infinity>());

        // commutator with the Dirichlet-to-Neumann map:
        //   D_t(N f) - N(D_t f)  vs  D_t n . grad(H f) - n . (grad v)*(grad H f) + d_n(comm_h)
        Vec nf0 = apply_dtn(s0.dtn(), fb0);
        Vec nf2 = apply_dtn(s2.dtn(), fb2);
        Vec ndtf = apply_dtn(s1.dtn(), dtf);
        Vec gx = u1x.boundary_trace(), gy = u1y.boundary_trace();
        Vec dn_comm = s1.solver().normal_derivative(comm_h);
        Real worst = 0.0;
        for (int k = 0; k < nt; ++k) {
            const Real lhs =
                (trig_eval(nf2, th2[k]) - trig_eval(nf0, th0[k])) / (2.0 * dt) - ndtf[k];
            const Real nx = f1.n(0, k), ny = f1.n(1, k);
            const Real jgx = m11[k] * gx[k] + m12[k] * gy[k];
            const Real jgy = m21[k] * gx[k] + m22[k] * gy[k];
            const Real rhs = dtn_formula(0, k) * gx[k] + dtn_formula(1, k) * gy[k] -
                             (nx * jgx + ny * jgy) + dn_comm[k];
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rep.dtn_map = std::max(rep.dtn_map, worst);

        // Leibniz rule for the boundary integral of the probe:
        //   d/dt int f dS = int D_t f + f (d_s(v . tau) + kappa v . n) dS
        const Real lhs_surf = (boundary_integrate(fb2, s2.gamma()) -
                               boundary_integrate(fb0, s0.gamma())) /
                              (2.0 * dt);
        Vec vtau = (vbx.array() * f1.tau.row(0).transpose().array() +
                    vby.array() * f1.tau.row(1).transpose().array())
                       .matrix();
        Vec vnorm = (vbx.array() * f1.n.row(0).transpose().array() +
                     vby.array() * f1.n.row(1).transpose().array())
                        .matrix();
        Vec ds_vtau = (deriv_theta(vtau).array() / f1.speed.array()).matrix();
        Vec integrand =
            (dtf.array() +
             fb1.array() * (ds_vtau.array() + mean_curvature(g1).array() * vnorm.array()))
                .matrix();
        rep.surface =
            std::max(rep.surface, std::abs(lhs_surf - boundary_integrate(integrand, g1)));

        rep.area_rate = std::max(
            rep.area_rate,
            std::abs(enclosed_area(s2.gamma()) - enclosed_area(s0.gamma())) / (2.0 * dt));
    }
    return rep;
}

}  // namespace droplet

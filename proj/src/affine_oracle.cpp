#include "droplet/affine_oracle.hpp"

#include <cmath>
#include <ostream>

#include "droplet/chart_fields.hpp"

namespace droplet {

namespace {

void check_affine(const Mat2& a, const Mat2& q) {
    if (!a.allFinite() || !q.allFinite()) throw ConfigError("affine state has non-finite entries");
    const Real sa = std::max<Real>(1, a.cwiseAbs().maxCoeff());
    if (std::abs(a.trace()) > 1e-12 * sa) throw ConfigError("velocity gradient is not trace-free");
    const Real sq = std::max<Real>(1, q.cwiseAbs().maxCoeff());
    if (std::abs(q(0, 1) - q(1, 0)) > 1e-12 * sq) throw ConfigError("domain form is not symmetric");
    if (q(0, 0) <= 0 || q.determinant() <= 0) throw ConfigError("domain form is not positive definite");
}

Vec pack(const AffineState& s) {
    Vec y(8);
    y << s.A(0, 0), s.A(0, 1), s.A(1, 0), s.A(1, 1), s.Q(0, 0), s.Q(0, 1), s.Q(1, 0), s.Q(1, 1);
    return y;
}

AffineState unpack(const Vec& y) {
    Mat2 a, q;
    a << y[0], y[1], y[2], y[3];
    q << y[4], y[5], y[6], y[7];
    a -= Mat2::Identity() * (a.trace() / 2);  // shed roundoff drift
    q = ((q + q.transpose()) / 2).eval();
    return AffineState(a, q);
}

Vec rhs_packed(const Vec& y) {
    const AffineState s = unpack(y);
    const AffineRhs r = affine_rhs(s);
    Vec dy(8);
    dy << r.dA(0, 0), r.dA(0, 1), r.dA(1, 0), r.dA(1, 1), r.dQ(0, 0), r.dQ(0, 1), r.dQ(1, 0),
        r.dQ(1, 1);
    return dy;
}

}  // namespace

AffineState::AffineState(const Mat2& a, const Mat2& q) : A(a), Q(q) { check_affine(a, q); }

Real affine_kappa(const AffineState& s) { return (s.A * s.A).trace() / s.Q.trace(); }

AffineRhs affine_rhs(const AffineState& s) {
    AffineRhs r;
    r.kappa = affine_kappa(s);
    r.dQ = -(s.A.transpose() * s.Q + s.Q * s.A);
    r.dA = -(s.A * s.A) + r.kappa * s.Q;
    return r;
}

Vec affine_eta(const AffineState& s, int n_theta) {
    Vec eta(n_theta);
    for (int k = 0; k < n_theta; ++k) {
        const Real th = 2 * M_PI * k / n_theta;
        const Vec2 u(std::cos(th), std::sin(th));
        eta[k] = 1 / std::sqrt(u.dot(s.Q * u)) - 1;
    }
    return eta;
}

Vec affine_taylor(const AffineState& s, int n_theta) {
    const Real kappa = affine_kappa(s);
    Vec a(n_theta);
    for (int k = 0; k < n_theta; ++k) {
        const Real th = 2 * M_PI * k / n_theta;
        const Vec2 u(std::cos(th), std::sin(th));
        const Vec2 x = u / std::sqrt(u.dot(s.Q * u));
        a[k] = kappa * (s.Q * x).norm();
    }
    return a;
}

Real affine_area(const AffineState& s) { return M_PI / std::sqrt(s.Q.determinant()); }

Real affine_energy(const AffineState& s) {
    // Second moments of the ellipse: int x x^T dx = (pi/4) Q^{-1} / sqrt(det Q).
    const Mat2 m = (M_PI / 4) / std::sqrt(s.Q.determinant()) * s.Q.inverse();
    return 0.5 * (s.A.transpose() * s.A * m).trace();
}

Vec ode45(const std::function<Vec(Real, const Vec&)>& f, Vec y, Real t0, Real t1, Real tol) {
    if (!(tol > 0) || !std::isfinite(t1 - t0)) throw ConfigError("bad integrator arguments");
    const Real span = t1 - t0;
    if (span == 0) return y;
    // Dormand-Prince 5(4) with FSAL and standard step control.
    static const Real c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
    static const Real a21 = 1. / 5;
    static const Real a31 = 3. / 40, a32 = 9. / 40;
    static const Real a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    static const Real a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                      a54 = -212. / 729;
    static const Real a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                      a65 = -5103. / 18656;
    static const Real b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784,
                      b6 = 11. / 84;
    static const Real e1 = 35. / 384 - 5179. / 57600, e3 = 500. / 1113 - 7571. / 16695,
                      e4 = 125. / 192 - 393. / 640, e5 = -2187. / 6784 + 92097. / 339200,
                      e6 = 11. / 84 - 187. / 2100, e7 = -1. / 40;

    Real t = t0;
    Real h = span / 64;
    Vec k1 = f(t, y);
    long iters = 0;
    while ((span > 0) ? (t < t1) : (t > t1)) {
        if (++iters > 2000000) throw StepFailure("adaptive integrator stalled");
        if ((span > 0) ? (t + h > t1) : (t + h < t1)) h = t1 - t;
        const Vec k2 = f(t + c2 * h, y + h * a21 * k1);
        const Vec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 =
            f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = f(t + h, ynew);
        const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        Real enorm = 0;
        for (int i = 0; i < y.size(); ++i) {
            const Real sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            enorm = std::max(enorm, std::abs(err[i]) / sc);
        }
        if (enorm <= 1) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
        }
        const Real fac = 0.9 * std::pow(std::max(enorm, 1e-10), -0.2);
        h *= std::min<Real>(5.0, std::max<Real>(0.2, fac));
        if (std::abs(h) < 1e-15 * std::max<Real>(1, std::abs(span)))
            throw StepFailure("adaptive integrator step size underflow");
    }
    return y;
}

AffineState integrate_affine(const AffineState& s0, Real T, Real tol) {
    const Vec y = ode45([](Real, const Vec& v) { return rhs_packed(v); }, pack(s0), 0, T, tol);
    return unpack(y);
}

std::vector<std::pair<Real, AffineState>> affine_trajectory(const AffineState& s0, Real T,
                                                            int n_samples, Real tol) {
    if (n_samples < 1) throw ConfigError("trajectory needs at least one sample");
    std::vector<std::pair<Real, AffineState>> out;
    out.reserve(n_samples + 1);
    out.emplace_back(0.0, s0);
    Vec y = pack(s0);
    const auto f = [](Real, const Vec& v) { return rhs_packed(v); };
    for (int i = 1; i <= n_samples; ++i) {
        const Real ta = T * (i - 1) / n_samples, tb = T * i / n_samples;
        y = ode45(f, y, ta, tb, tol);
        out.emplace_back(tb, unpack(y));
    }
    return out;
}

Real momentum_residual(const AffineState& s0, Real t, Real tol) {
    // dA/dt by fourth-order central differences of the integrated flow,
    // then sup_x |dA x + A^2 x + grad p(x)| over interior samples.
    const Real h = 1e-3 * std::max<Real>(1, std::abs(t));
    Mat2 a[5];
    for (int i = -2; i <= 2; ++i) a[i + 2] = integrate_affine(s0, t + i * h, tol).A;
    const Mat2 dA = (8 * (a[3] - a[1]) - (a[4] - a[0])) / (12 * h);
    const AffineState st = integrate_affine(s0, t, tol);
    const Real kappa = affine_kappa(st);
    Real worst = 0;
    for (int i = 0; i < 8; ++i) {
        const Real th = 2 * M_PI * i / 8;
        for (const Real r : {0.3, 0.7, 0.95}) {
            const Vec2 u(std::cos(th), std::sin(th));
            const Vec2 x = r * u / std::sqrt(u.dot(st.Q * u));
            const Vec2 res = dA * x + st.A * (st.A * x) - kappa * (st.Q * x);
            worst = std::max(worst, res.norm());
        }
    }
    return worst;
}

FluidState to_fluid_state(const AffineState& s, int n_theta, int n_rho, Real* taylor_residual) {
    BoundaryGraph g(affine_eta(s, n_theta));
    if (!in_collar(g)) throw CollarExit("affine domain leaves the collar");
    const ChartPtr c = make_chart(g, n_rho);
    VectorField v = make_vector_field(
        c, [&](Real x, Real y) { return Vec2(s.A(0, 0) * x + s.A(0, 1) * y,
                                             s.A(1, 0) * x + s.A(1, 1) * y); });
    FluidState st(std::move(v), 0.0);
    if (taylor_residual) {
        const Vec exact = affine_taylor(s, n_theta);
        *taylor_residual = (st.taylor() - exact).cwiseAbs().maxCoeff();
    }
    return st;
}

void write_affine_csv(std::ostream& os,
                      const std::vector<std::pair<Real, AffineState>>& traj) {
    os << "t,a11,a12,a21,a22,q11,q12,q22\n";
    os.precision(17);
    for (const auto& [t, s] : traj) {
        os << t << ',' << s.A(0, 0) << ',' << s.A(0, 1) << ',' << s.A(1, 0) << ',' << s.A(1, 1)
           << ',' << s.Q(0, 0) << ',' << s.Q(0, 1) << ',' << s.Q(1, 1) << '\n';
    }
}

}  // namespace droplet

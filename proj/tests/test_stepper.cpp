#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "droplet/stepper.hpp"

using namespace droplet;

namespace {

constexpr double kPi = 3.14159265358979323846;

ChartPtr disk_chart(int nt, int nr) {
    return make_chart(BoundaryGraph(Vec::Zero(nt)), nr);
}

ChartPtr wavy_chart(int nt, int nr, double amp = 0.03, int mode = 2) {
    Vec eta(nt);
    for (int k = 0; k < nt; ++k) eta[k] = amp * std::cos(mode * 2.0 * kPi * k / nt);
    return make_chart(BoundaryGraph(eta), nr);
}

// Divergence-free rotational band: v = grad^perp sum_m m^{-q} Re(zeta^m).
VectorField stream_band(const ChartPtr& c, int m_lo, int m_hi, double q) {
    return make_vector_field(c, [=](double x, double y) {
        std::complex<double> zeta(x, y);
        double vx = 0, vy = 0;
        for (int m = m_lo; m <= m_hi; ++m) {
            std::complex<double> w = std::pow(m, 1.0 - q) * std::pow(zeta, m - 1);
            vx += w.imag();
            vy += w.real();
        }
        return Vec2(vx, vy);
    });
}

VectorField rigid_rotation(const ChartPtr& c, double om) {
    return make_vector_field(c, [=](double x, double y) { return Vec2(-om * y, om * x); });
}

VectorField straining(const ChartPtr& c, double al) {
    return make_vector_field(c, [=](double x, double y) { return Vec2(al * x, -al * y); });
}

double vdiff_sup(const VectorField& a, const VectorField& b) {
    return std::max((a.x.v - b.x.v).cwiseAbs().maxCoeff(),
                    (a.y.v - b.y.v).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("config: derived scales and validation") {
    StepConfig cfg;
    cfg.eps = 1e-3;
    CHECK(cfg.lambda_cut() == doctest::Approx(1000.0));
    CHECK(cfg.j_half() == 5);  // 2^5 ~ eps^{-1/2} = 31.6
    cfg.eps = 4e-3;
    CHECK(cfg.j_half() == 4);
    cfg.eps = 2e-3;
    CHECK(cfg.j_half() == 4);
    cfg.j_half_override = 7;
    CHECK(cfg.j_half() == 7);
}

TEST_CASE("config: rejects bad eps and grid noise floor") {
    auto c = disk_chart(32, 8);
    StepConfig cfg;
    cfg.eps = 1e-2;
    CHECK_NOTHROW(cfg.validate(*c));
    cfg.eps = -1.0;
    CHECK_THROWS_AS(cfg.validate(*c), ConfigError);
    cfg.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(*c), ConfigError);
    cfg.eps = 1e-9;  // way below 4 h_min^2 for an 8-node radial grid
    CHECK_THROWS_AS(cfg.validate(*c), ConfigError);
    cfg.eps = 1e-2;
    cfg.max_steps = 0;
    CHECK_THROWS_AS(cfg.validate(*c), ConfigError);
}

TEST_CASE("domain phase: constant graph shifts by exactly c_margin eps^2") {
    int nt = 64, nr = 12;
    ChartPtr c = make_chart(BoundaryGraph(Vec::Constant(nt, 0.05)), nr);
    FluidState st(VectorField(zero_field(c), zero_field(c)), 0.0);
    StepConfig cfg;
    cfg.eps = 1e-2;
    cfg.c_margin = 1.0;
    StepReport rep;
    FluidState out = step_domain_reg(st, cfg, &rep);
    CHECK((out.gamma().eta.array() - (0.05 - 1e-4)).abs().maxCoeff() < 1e-15);
    CHECK(rep.domain_change_c1 == doctest::Approx(1e-4).epsilon(1e-10));
    CHECK(out.chart()->n_theta() == nt);
    CHECK(out.chart()->n_rho() == nr);
}

TEST_CASE("domain phase: heat factor on a single mode and C1 scaling") {
    int nt = 64, nr = 12;
    Vec eta(nt);
    for (int k = 0; k < nt; ++k) eta[k] = 0.1 * std::cos(4 * 2.0 * kPi * k / nt);
    ChartPtr c = make_chart(BoundaryGraph(eta), nr);
    FluidState st(VectorField(zero_field(c), zero_field(c)), 0.0);

    StepConfig cfg;
    cfg.eps = 1e-2;
    cfg.c_margin = 0.0;
    StepReport rep;
    FluidState out = step_domain_reg(st, cfg, &rep);
    auto [a, b] = cos_sin_amplitudes(out.gamma().eta);
    CHECK(a[4] == doctest::Approx(0.1 * std::exp(-16.0 * 1e-4)).epsilon(1e-10));
    CHECK(std::abs(b[4]) < 1e-13);
    // containment: smoothed graph sits weakly inside the original
    CHECK((out.gamma().eta - eta).maxCoeff() <= 1e-14);

    // ||eta_eps - eta||_C1 <= C eps^2: the measured C is stable under halving
    StepConfig cfg2 = cfg;
    cfg2.eps = 5e-3;
    StepReport rep2;
    step_domain_reg(st, cfg2, &rep2);
    double c1 = rep.domain_change_c1 / (cfg.eps * cfg.eps);
    double c2 = rep2.domain_change_c1 / (cfg2.eps * cfg2.eps);
    CHECK(c1 > 0.0);
    CHECK(c2 / c1 > 0.7);
    CHECK(c2 / c1 < 1.4);
}

TEST_CASE("velocity phase: cutoff above the resolved spectrum is the identity") {
    auto c = wavy_chart(48, 14);
    FluidState st(stream_band(c, 2, 6, 2.0), 0.0);
    StepConfig cfg;
    cfg.eps = 1e-3;  // lambda_cut = 1000 far above the grid's spectrum
    StepReport rep;
    FluidState out = step_velocity_reg(st, cfg, &rep);
    CHECK((out.velocity().x.v.array() == st.velocity().x.v.array()).all());
    CHECK((out.velocity().y.v.array() == st.velocity().y.v.array()).all());
    CHECK(rep.velocity_change == 0.0);
    CHECK(std::abs(rep.flux_mean) < 1e-10);
}

// At j_half = 2 the default mollifier footprint cannot fit in the unit disk
// from targets near the center; a narrower kernel with the same moment order
// does, and every identity checked below is kernel-independent.
static MomentKernel narrow_kernel() { return MomentKernel(4, 1.5, 1.3, 0.8); }

TEST_CASE("velocity phase: band-limited below the cutoff changes nothing") {
    auto c = disk_chart(64, 20);
    FluidState st(stream_band(c, 2, 8, 2.0), 0.0);
    StepConfig cfg;
    cfg.eps = 0.05;  // lambda_cut = 20 inside the resolved band, j_half = 2
    cfg.kernel = narrow_kernel();
    FluidState out = step_velocity_reg(st, cfg);
    CHECK(vdiff_sup(out.velocity(), st.velocity()) < 1e-8);
}

TEST_CASE("velocity phase: high normal eigenmode removed, vorticity untouched") {
    const int m = 80;
    auto c = disk_chart(192, 56);
    VectorField v = make_vector_field(c, [=](double x, double y) {
        std::complex<double> w = std::pow(std::complex<double>(x, y), m - 1);
        return Vec2(0.5 * (-y) + w.real(), 0.5 * x - w.imag());
    });
    FluidState st(v, 0.0);
    StepConfig cfg;
    cfg.eps = 0.05;  // lambda_cut = 20 < m, j_half = 2 so t = m w / 8 = 15
    cfg.kernel = narrow_kernel();
    StepReport rep;
    FluidState out = step_velocity_reg(st, cfg, &rep);

    const DtNOperator& N = st.dtn();
    auto hi_part = [&](const BoundaryScalar& f) {
        return (f - dtn_spectral_projection(N, f, cfg.lambda_cut())).eval();
    };
    BoundaryScalar hi_before = hi_part(normal_trace(st.velocity()));
    BoundaryScalar hi_after = hi_part(normal_trace(out.velocity()));
    CHECK(hi_before.cwiseAbs().maxCoeff() > 0.5);  // the mode really is high
    // the surviving high content is the mollified field's, which the kernel
    // damps hard at t = 15
    CHECK(hi_after.cwiseAbs().maxCoeff() < 0.25 * hi_before.cwiseAbs().maxCoeff());
    // rotational part untouched up to solver tolerance
    Field dom = curl2d(out.velocity()) - curl2d(st.velocity());
    CHECK(dom.v.cwiseAbs().maxCoeff() < 1e-5);
    CHECK(rep.velocity_change > 0.0);
}

TEST_CASE("velocity phase: net flux trips NonzeroMean") {
    auto c = disk_chart(48, 12);
    VectorField v = make_vector_field(c, [](double x, double y) { return Vec2(x, y); });
    FluidState st(v, 0.0, /*div_tol=*/10.0);  // divergence 2, waved through
    StepConfig cfg;
    cfg.eps = 0.05;
    CHECK_THROWS_AS(step_velocity_reg(st, cfg), NonzeroMean);
}

TEST_CASE("transport re-graph: unmoved and rotated node clouds") {
    int nt = 64;
    Vec eta(nt);
    for (int k = 0; k < nt; ++k) eta[k] = 0.05 * std::cos(3 * 2.0 * kPi * k / nt);
    BoundaryGraph g(eta);

    BoundaryGraph same = transport_graph(g, g.points());
    CHECK((same.eta - eta).cwiseAbs().maxCoeff() < 1e-12);

    // rotate the unit circle's nodes: still the unit circle
    BoundaryGraph disk(Vec::Zero(nt));
    Mat2X pts = disk.points();
    double b = 0.04;
    Mat2X rot(2, nt);
    rot.row(0) = std::cos(b) * pts.row(0) - std::sin(b) * pts.row(1);
    rot.row(1) = std::sin(b) * pts.row(0) + std::cos(b) * pts.row(1);
    BoundaryGraph turned = transport_graph(disk, rot);
    CHECK(turned.eta.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transport re-graph: non-star cloud is rejected") {
    int nt = 64;
    Mat2X pts(2, nt);
    for (int k = 0; k < nt; ++k) {
        double sv = 2.0 * kPi * k / nt;
        double r = 1.0 + 1.2 * std::cos(sv);  // limacon with an inner loop
        pts(0, k) = r * std::cos(sv);
        pts(1, k) = r * std::sin(sv);
    }
    BoundaryGraph disk(Vec::Zero(nt));
    CHECK_THROWS_AS(transport_graph(disk, pts), StarShapeViolation);
}

TEST_CASE("euler phase: zero velocity without gravity is the identity step") {
    auto c = wavy_chart(48, 14, 0.04, 3);
    FluidState st(VectorField(zero_field(c), zero_field(c)), 0.0);
    StepConfig cfg;
    cfg.eps = 1e-2;
    StepReport rep;
    FluidState out = step_euler_transport(st, cfg, &rep);
    CHECK((out.gamma().eta - c->gamma.eta).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(out.velocity().x.v.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(out.velocity().y.v.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(rep.volume_drift < 1e-13);
    CHECK(rep.residual_c0 < 1e-13);
    CHECK(rep.residual_c1 < 1e-12);
    CHECK(rep.invert_iters <= 2);
}

TEST_CASE("euler phase: affine fields on the disk step exactly") {
    // For v = A x with tr A = 0 the disk pressure is an exact quadratic, and
    // Cayley-Hamilton (A^2 = -det(A) I) makes the explicit update reproduce
    // v1 = A y on the moved domain to machine precision.
    auto c = disk_chart(64, 20);
    for (bool rot : {true, false}) {
        FluidState st(rot ? rigid_rotation(c, 0.8) : straining(c, 0.8), 0.0);
        const double eps = 1e-2;
        StepConfig cfg;
        cfg.eps = eps;
        StepReport rep;
        FluidState out = step_euler_transport(st, cfg, &rep);
        VectorField ref = rot ? rigid_rotation(out.chart(), 0.8) : straining(out.chart(), 0.8);
        CHECK(vdiff_sup(out.velocity(), ref) < 1e-11);
        CHECK(rep.residual_c0 < 1e-11);
        CHECK(rep.residual_c1 < 1e-9);
        CHECK(rep.volume_drift < 10.0 * eps * eps);
        if (rot) {
            // the disk turns into the disk of radius sqrt(1 + eps^2 om^2)
            double growth = eps * eps * 0.64 / 2.0;
            CHECK((out.gamma().eta.array() - growth).abs().maxCoeff() < 1e-9);
            CHECK(rep.volume_drift == doctest::Approx(eps * eps * 0.64).epsilon(0.05));
        }
    }
}

TEST_CASE("run: zero velocity stays put under the full loop") {
    int nt = 48, nr = 14;
    Vec eta(nt);
    for (int k = 0; k < nt; ++k) eta[k] = 0.03 * std::cos(2 * 2.0 * kPi * k / nt);
    ChartPtr c = make_chart(BoundaryGraph(eta), nr);
    FluidState st(VectorField(zero_field(c), zero_field(c)), 0.0);

    StepConfig cfg;
    cfg.eps = 1e-3;
    cfg.taylor_floor = -1.0;  // static drop has a = 0; disarm the trip
    Trajectory traj = run(st, cfg, 20 * cfg.eps);
    CHECK(traj.trip == TripReason::None);
    CHECK(traj.steps() == 20);
    const FluidState& fin = traj.states.back();
    CHECK(fin.velocity().x.v.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(fin.velocity().y.v.cwiseAbs().maxCoeff() < 1e-14);
    CHECK((fin.gamma().eta - eta).cwiseAbs().maxCoeff() < 1e-4);
    for (const StepReport& r : traj.reports) {
        CHECK(std::abs(r.energy_ratio - 1.0) < 1e-9);
        CHECK(r.volume_drift < 1e-12);
        CHECK(r.residual_c0 < 1e-12);
    }
    CHECK_NOTHROW(require_clean(traj));
}

TEST_CASE("run: rigid rotation trips the Taylor sign monitor at step zero") {
    auto c = disk_chart(48, 14);
    FluidState st(rigid_rotation(c, 1.0), 0.0);
    StepConfig cfg;
    cfg.eps = 2e-3;
    cfg.taylor_floor = 0.05;
    Trajectory traj = run(st, cfg, 0.1);
    CHECK(traj.trip == TripReason::TaylorSign);
    CHECK(traj.trip_step == 0);
    CHECK(traj.steps() == 0);
    CHECK(traj.states.size() == 1);
    CHECK_THROWS_AS(require_clean(traj), MonitorTrip);
    try {
        require_clean(traj);
    } catch (const MonitorTrip& e) {
        CHECK(e.reason == TripReason::TaylorSign);
    }
}

TEST_CASE("run: straining flow runs clean with stable per-step energy growth") {
    // Perturbed-disk start so the energy is not at a stationary point of the
    // trajectory; compare the per-step growth constant at a fixed horizon.
    const double al = 0.25, T = 0.02;
    int nt = 48, nr = 16;
    Vec eta(nt);
    for (int k = 0; k < nt; ++k) eta[k] = 0.04 * std::cos(2 * 2.0 * kPi * k / nt);
    ChartPtr c = make_chart(BoundaryGraph(eta), nr);
    FluidState st(straining(c, al), 0.0);

    auto growth_const = [&](double eps) {
        StepConfig cfg;
        cfg.eps = eps;
        cfg.taylor_floor = 0.02;  // a ~ al^2 = 0.0625 on the strain
        Trajectory traj = run(st, cfg, T);
        REQUIRE(traj.trip == TripReason::None);
        REQUIRE(traj.steps() == static_cast<int>(std::lround(T / eps)));
        double worst = 0.0;
        for (const StepReport& r : traj.reports) {
            worst = std::max(worst, std::abs(r.energy_ratio - 1.0) / eps);
            CHECK(r.volume_drift < 10.0 * eps * eps);
            CHECK(std::isfinite(r.control_post.a_sharp));
            CHECK(std::isfinite(r.control_post.b_sharp));
            CHECK(std::isfinite(r.b_integral));
            CHECK(r.control_post.min_a > 0.0);
        }
        return worst;
    };
    double c4 = growth_const(4e-3);
    double c2 = growth_const(2e-3);
    CHECK(c4 > 0.0);
    CHECK(c2 > 0.0);
    CHECK(c4 / c2 > 0.6);
    CHECK(c4 / c2 < 1.6);
}

TEST_CASE("run: bitwise reproducibility") {
    auto c = disk_chart(48, 14);
    FluidState st(straining(c, 0.2), 0.0);
    StepConfig cfg;
    cfg.eps = 4e-3;
    cfg.taylor_floor = 0.01;
    Trajectory a = run(st, cfg, 3 * cfg.eps);
    Trajectory b = run(st, cfg, 3 * cfg.eps);
    REQUIRE(a.steps() == b.steps());
    const FluidState& fa = a.states.back();
    const FluidState& fb = b.states.back();
    CHECK((fa.gamma().eta.array() == fb.gamma().eta.array()).all());
    CHECK((fa.velocity().x.v.array() == fb.velocity().x.v.array()).all());
    CHECK((fa.velocity().y.v.array() == fb.velocity().y.v.array()).all());
}

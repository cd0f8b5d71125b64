#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "droplet/elliptic_core.hpp"

#include <cmath>

using namespace droplet;

namespace {

const Real kPi = std::acos(-1.0);

ChartPtr disk_chart(int nt = 64, int nr = 24, Real eta0 = 0.0) {
    return make_chart(BoundaryGraph(Vec::Constant(nt, eta0)), nr);
}

ChartPtr wavy_chart(int nt = 64, int nr = 24, Real amp = 0.1, int m = 2) {
    Vec t = ReferenceCircle(nt).thetas();
    Vec eta(nt);
    for (int k = 0; k < nt; ++k) eta[k] = amp * std::cos(m * t[k]);
    return make_chart(BoundaryGraph(eta), nr);
}

BoundaryScalar harmonic_bc(int nt, int m, bool sine = false) {
    Vec t = ReferenceCircle(nt).thetas();
    BoundaryScalar g(nt);
    for (int k = 0; k < nt; ++k) g[k] = sine ? std::sin(m * t[k]) : std::cos(m * t[k]);
    return g;
}

}  // namespace

TEST_CASE("assembled matrix reproduces the field-calculus laplacian") {
    ChartPtr c = wavy_chart(32, 12);
    Mat L = assemble_laplacian_matrix(*c);
    Field f = make_field(c, [](Real x, Real y) { return std::sin(x + 0.5 * y) + x * x * y; });
    Vec fv = Eigen::Map<const Vec>(f.v.data(), f.v.size());
    Vec Lf = L * fv;
    Mat want = laplacian(f).v;
    Vec wv = Eigen::Map<const Vec>(want.data(), want.size());
    const Real scale = wv.cwiseAbs().maxCoeff();
    CHECK((Lf - wv).cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("dirichlet solve on the disk: constants and the parabolic profile") {
    DirichletSolver s(disk_chart());
    const int nt = 64;

    Field u0 = s.solve(zero_field(s.chart()), BoundaryScalar::Constant(nt, 3.25));
    CHECK((u0.v.array() - 3.25).abs().maxCoeff() < 1e-10);

    const Real alpha = 0.8;
    Field rhs = make_field(s.chart(), [&](Real, Real) { return -2.0 * alpha * alpha; });
    Field u = s.solve(rhs, BoundaryScalar::Zero(nt));
    Field want = make_field(s.chart(), [&](Real x, Real y) {
        return 0.5 * alpha * alpha * (1.0 - x * x - y * y);
    });
    CHECK((u.v - want.v).cwiseAbs().maxCoeff() < 1e-10);
    // Taylor coefficient of this state: -du/dn = alpha^2 on the boundary
    BoundaryScalar a = -s.normal_derivative(u).array();
    CHECK((a.array() - alpha * alpha).abs().maxCoeff() < 1e-9);
}

TEST_CASE("harmonic extension of single modes on disks") {
    const int nt = 64, nr = 24;
    DirichletSolver s(disk_chart(nt, nr));
    for (int m : {1, 3, 8, 16}) {
        Field u = s.harmonic_extension(harmonic_bc(nt, m));
        Field want = make_field(s.chart(), [m](Real x, Real y) {
            const Real r = std::hypot(x, y);
            return std::pow(r, m) * std::cos(m * std::atan2(y, x));
        });
        CHECK((u.v - want.v).cwiseAbs().maxCoeff() < 1e-8);
    }
    // maximum principle on a perturbed domain
    DirichletSolver sw(wavy_chart());
    BoundaryScalar g = random_bandlimited(nt, 8, 5, true);
    Field uw = sw.harmonic_extension(g);
    CHECK(uw.v.maxCoeff() <= g.maxCoeff() + 1e-8);
    CHECK(uw.v.minCoeff() >= g.minCoeff() - 1e-8);
}

TEST_CASE("dirichlet solve on a wavy domain against a manufactured solution") {
    ChartPtr c = wavy_chart();
    DirichletSolver s(c);
    auto exact = [](Real x, Real y) { return x * x * y - 0.5 * y * y + x; };
    Field rhs = make_field(c, [](Real, Real y) { return 2.0 * y - 1.0; });
    Field want = make_field(c, exact);
    Field u = s.solve(rhs, want.boundary_trace());
    CHECK((u.v - want.v).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("dtn on disks matches the mode symbol") {
    const int nt = 64;
    DirichletSolver s(disk_chart());
    DtNOperator op = assemble_dtn(s);
    CHECK(op.trusted_mode_cap >= 16);
    CHECK((op.N * Vec::Ones(nt)).cwiseAbs().maxCoeff() < 1e-8);
    for (int m : {1, 2, 5, 16}) {
        BoundaryScalar g = harmonic_bc(nt, m);
        BoundaryScalar Ng = apply_dtn(op, g);
        CHECK((Ng - Real(m) * g).cwiseAbs().maxCoeff() < 1e-6 * m);
        BoundaryScalar N2g = apply_dtn_power(op, g, 2);
        CHECK((N2g - Real(m) * Real(m) * g).cwiseAbs().maxCoeff() < 1e-5 * m * m);
    }
    // radius-2 disk halves the symbol
    DirichletSolver s2(disk_chart(nt, 24, 1.0));
    DtNOperator op2 = assemble_dtn(s2);
    for (int m : {1, 4}) {
        BoundaryScalar g = harmonic_bc(nt, m);
        CHECK((apply_dtn(op2, g) - 0.5 * m * g).cwiseAbs().maxCoeff() < 1e-6 * m);
    }
    CHECK_THROWS_AS(apply_dtn_power(op, harmonic_bc(nt, 1), 5), PowerTooHigh);
}

TEST_CASE("dtn is self-adjoint and nonnegative in the arclength pairing") {
    DirichletSolver s(wavy_chart());
    DtNOperator op = assemble_dtn(s);
    // the exposed matrix honors kernel / symmetry / sign exactly; the raw
    // response asymmetry and the validity window are reported as metadata
    Mat pair_form = op.arc_w.asDiagonal() * op.N;
    CHECK((pair_form - pair_form.transpose()).cwiseAbs().maxCoeff() <
          1e-8 * op.N.cwiseAbs().maxCoeff());
    CHECK((op.N * Vec::Ones(64)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(op.lambda.minCoeff() > -1e-8);
    CHECK(op.trusted_mode_cap >= 16);
    CHECK(op.kept_mode_cap >= op.trusted_mode_cap);
    // kept-band responses are percent-accurate or better in the pairing scale
    CHECK(op.sym_defect < 1e-4 * op.gamma.length() * op.lambda.maxCoeff());

    BoundaryScalar f = random_bandlimited(64, 10, 2, true);
    BoundaryScalar g = random_bandlimited(64, 10, 3, true);
    const Real lhs = op.arclength_inner(apply_dtn(op, f), g);
    const Real rhs = op.arclength_inner(f, apply_dtn(op, g));
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(lhs)));

    // Green identity: <Nf, f> = || grad Hf ||^2
    Field Hf = s.harmonic_extension(f);
    VectorField gr = gradient(Hf);
    const Real dirichlet_energy = inner(gr.x, gr.x) + inner(gr.y, gr.y);
    const Real pairing = op.arclength_inner(apply_dtn(op, f), f);
    CHECK(pairing >= -1e-8);
    CHECK(std::abs(pairing - dirichlet_energy) < 1e-6 * std::max(1.0, pairing));
}

TEST_CASE("dtn comparability with the boundary H1 norm is grid-stable") {
    auto fit = [](int nt, int nr) {
        DirichletSolver s(wavy_chart(nt, nr));
        DtNOperator op = assemble_dtn(s);
        const BoundaryGraph& g = op.gamma;
        Real cmin = 1e300, cmax = 0.0;
        for (int m = 1; m <= 8; ++m) {
            for (bool sine : {false, true}) {
                BoundaryScalar f = harmonic_bc(nt, m, sine);
                Vec fs = deriv_theta(f).cwiseQuotient(g.speed());
                const Real h1 = std::sqrt(op.arclength_inner(f, f) + op.arclength_inner(fs, fs));
                const Real num = std::sqrt(op.arclength_inner(apply_dtn(op, f), apply_dtn(op, f))) +
                                 std::sqrt(op.arclength_inner(f, f));
                const Real r = num / h1;
                cmin = std::min(cmin, r);
                cmax = std::max(cmax, r);
            }
        }
        return std::pair<Real, Real>(cmin, cmax);
    };
    auto [c1, C1] = fit(64, 24);
    auto [c2, C2] = fit(96, 32);
    CHECK(c1 > 0.1);
    CHECK(C1 < 10.0);
    CHECK(std::abs(c1 - c2) < 0.1 * c1);
    CHECK(std::abs(C1 - C2) < 0.1 * C1);
}

TEST_CASE("spectral projection cuts high modes and is idempotent") {
    const int nt = 64;
    DirichletSolver s(disk_chart());
    DtNOperator op = assemble_dtn(s);
    BoundaryScalar g = harmonic_bc(nt, 1) + harmonic_bc(nt, 8);
    BoundaryScalar low = dtn_spectral_projection(op, g, 4.0);
    CHECK((low - harmonic_bc(nt, 1)).cwiseAbs().maxCoeff() < 1e-6);
    BoundaryScalar all = dtn_spectral_projection(op, g, 1e300);
    CHECK((all - g).cwiseAbs().maxCoeff() < 1e-10);

    DirichletSolver sw(wavy_chart());
    DtNOperator opw = assemble_dtn(sw);
    BoundaryScalar r = random_bandlimited(nt, 12, 9, true);
    BoundaryScalar p1 = dtn_spectral_projection(opw, r, 5.0);
    BoundaryScalar p2 = dtn_spectral_projection(opw, p1, 5.0);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pseudo-inverse on mean-zero boundary data") {
    const int nt = 64;
    DirichletSolver s(disk_chart());
    DtNOperator op = assemble_dtn(s);
    for (int m : {1, 4}) {
        BoundaryScalar g = harmonic_bc(nt, m);
        CHECK((dtn_inverse_on_mean_zero(op, g) - g / Real(m)).cwiseAbs().maxCoeff() < 1e-6);
    }
    CHECK(dtn_inverse_on_mean_zero(op, BoundaryScalar::Zero(nt)).cwiseAbs().maxCoeff() == 0.0);

    DirichletSolver sw(wavy_chart());
    DtNOperator opw = assemble_dtn(sw);
    BoundaryScalar r = random_bandlimited(nt, 10, 17, true);
    r.array() -= opw.arc_w.dot(r) / opw.arc_w.sum();  // arclength mean zero
    BoundaryScalar h = dtn_inverse_on_mean_zero(opw, r);
    CHECK((apply_dtn(opw, h) - r).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS(dtn_inverse_on_mean_zero(opw, BoundaryScalar::Ones(nt)), NonzeroMean);
}

TEST_CASE("dtn product rule: trivial and disk cases") {
    const int nt = 64;
    DirichletSolver s(wavy_chart());
    DtNOperator op = assemble_dtn(s);
    BoundaryScalar one = BoundaryScalar::Ones(nt);
    BoundaryScalar g = random_bandlimited(nt, 10, 4, true);
    CHECK(check_dtn_leibniz(s, op, one, g) < 1e-7);

    DirichletSolver sd(disk_chart(256, 64));
    DtNOperator opd = assemble_dtn(sd);
    BoundaryScalar f = harmonic_bc(256, 1);
    CHECK(check_dtn_leibniz(sd, opd, f, f) < 1e-6);
}

TEST_CASE("dtn product rule on random band-limited pairs") {
    const int nt = 64;
    DirichletSolver s(wavy_chart());
    DtNOperator op = assemble_dtn(s);
    // keep the product band inside the operator's validity window
    REQUIRE(op.trusted_mode_cap >= nt / 4);
    for (unsigned seed = 0; seed < 3; ++seed) {
        BoundaryScalar f = random_bandlimited(nt, nt / 8, 100 + seed, true);
        BoundaryScalar g = random_bandlimited(nt, nt / 8, 200 + seed, true);
        CHECK(check_dtn_leibniz(s, op, f, g) < 1e-5);
    }
}

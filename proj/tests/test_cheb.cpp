#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "droplet/cheb.hpp"

#include <cmath>

using namespace droplet;

TEST_CASE("radial nodes ascend, avoid zero, end at one") {
    ChebRadial cr(24);
    CHECK(cr.nodes[0] > 0.0);
    CHECK(cr.nodes[23] == 1.0);
    for (int j = 1; j < 24; ++j) CHECK(cr.nodes[j] > cr.nodes[j - 1]);
    // boundary clustering: last gap much smaller than uniform
    CHECK(1.0 - cr.nodes[22] < 0.5 / 24.0);
}

TEST_CASE("differentiation is exact on polynomials of full degree") {
    const int n = 20;
    ChebRadial cr(n);
    Vec f(n), want(n);
    for (int j = 0; j < n; ++j) {
        const Real r = cr.nodes[j];
        // degree n-1 polynomial
        f[j] = std::pow(r, n - 1) - 2.0 * std::pow(r, 5) + 3.0 * r;
        want[j] = (n - 1) * std::pow(r, n - 2) - 10.0 * std::pow(r, 4) + 3.0;
    }
    CHECK(((cr.D * f) - want).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("second derivative via squared matrix") {
    const int n = 24;
    ChebRadial cr(n);
    Vec f(n), want(n);
    for (int j = 0; j < n; ++j) {
        const Real r = cr.nodes[j];
        f[j] = std::pow(r, 7) + r * r;
        want[j] = 42.0 * std::pow(r, 5) + 2.0;
    }
    CHECK(((cr.D * (cr.D * f)) - want).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("quadrature integrates monomials exactly") {
    const int n = 16;
    ChebRadial cr(n);
    for (int k = 0; k < n; ++k) {
        Vec f(n);
        for (int j = 0; j < n; ++j) f[j] = std::pow(cr.nodes[j], k);
        const Real got = cr.quad_w.dot(f);
        CHECK(got == doctest::Approx(1.0 / (k + 1)).epsilon(1e-12));
    }
}

TEST_CASE("interpolation reproduces polynomials off-grid and just past one") {
    const int n = 18;
    ChebRadial cr(n);
    Vec f(n);
    auto poly = [](Real r) { return 1.0 - 3.0 * r + std::pow(r, 9); };
    for (int j = 0; j < n; ++j) f[j] = poly(cr.nodes[j]);
    for (Real r : {0.001, 0.37, 0.99, 1.0}) CHECK(cr.eval(f, r) == doctest::Approx(poly(r)).epsilon(1e-11));
    // short extrapolation band above the boundary node
    const Real band = 1.0 + 2.0 * (1.0 - cr.nodes[n - 2]);
    CHECK(cr.eval(f, band) == doctest::Approx(poly(band)).epsilon(1e-8));
}

TEST_CASE("cardinal weights agree with direct evaluation") {
    const int n = 12;
    ChebRadial cr(n);
    Vec f(n);
    for (int j = 0; j < n; ++j) f[j] = std::sin(3.0 * cr.nodes[j]);
    for (Real r : {0.2, cr.nodes[4], 0.95}) {
        CHECK(cr.cardinal(r).dot(f) == doctest::Approx(cr.eval(f, r)).epsilon(1e-13));
        CHECK(cr.cardinal(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("smooth functions converge spectrally") {
    auto err_for = [](int n) {
        ChebRadial cr(n);
        Vec f(n);
        for (int j = 0; j < n; ++j) f[j] = std::exp(2.0 * cr.nodes[j]);
        Real e = 0.0;
        for (Real r : {0.1, 0.5, 0.9}) e = std::max(e, std::abs(cr.eval(f, r) - std::exp(2.0 * r)));
        return e;
    };
    CHECK(err_for(16) < 1e-10);
    CHECK(err_for(24) < 1e-13);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "droplet/circle.hpp"

#include <cmath>

using namespace droplet;

TEST_CASE("fourier transform round trip") {
    const int n = 64;
    Vec f = random_bandlimited(n, 20, 7, true);
    Vec g = fourier_values(fourier_coeffs(f));
    CHECK((f - g).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("mode numbering covers [-n/2+1, n/2]") {
    CHECK(mode_number(0, 8) == 0);
    CHECK(mode_number(3, 8) == 3);
    CHECK(mode_number(4, 8) == 4);
    CHECK(mode_number(5, 8) == -3);
    CHECK(mode_number(7, 8) == -1);
}

TEST_CASE("derivative of a single harmonic") {
    const int n = 64;
    ReferenceCircle rc(n);
    Vec t = rc.thetas();
    Vec f(n), want(n);
    for (int k = 0; k < n; ++k) {
        f[k] = std::sin(3.0 * t[k]);
        want[k] = 3.0 * std::cos(3.0 * t[k]);
    }
    CHECK((deriv_theta(f) - want).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("derivative annihilates the unsigned top mode") {
    const int n = 32;
    Vec t = ReferenceCircle(n).thetas();
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = std::cos((n / 2) * t[k]);
    CHECK(deriv_theta(f).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("heat smoothing damps each mode by exp(-t m^2)") {
    const int n = 64;
    Vec t = ReferenceCircle(n).thetas();
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = std::cos(5.0 * t[k]) + std::sin(2.0 * t[k]);
    Vec g = heat_smooth(f, 0.03);
    Vec want(n);
    for (int k = 0; k < n; ++k)
        want[k] = std::exp(-0.03 * 25.0) * std::cos(5.0 * t[k]) +
                  std::exp(-0.03 * 4.0) * std::sin(2.0 * t[k]);
    CHECK((g - want).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("band limiting removes exactly the high modes") {
    const int n = 64;
    Vec t = ReferenceCircle(n).thetas();
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = 1.0 + std::cos(4.0 * t[k]) + std::sin(9.0 * t[k]);
    Vec g = band_limit(f, 4);
    Vec want(n);
    for (int k = 0; k < n; ++k) want[k] = 1.0 + std::cos(4.0 * t[k]);
    CHECK((g - want).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("trigonometric evaluation matches at nodes and off-grid") {
    const int n = 32;
    ReferenceCircle rc(n);
    Vec t = rc.thetas();
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = 0.3 + std::cos(5.0 * t[k]) - 2.0 * std::sin(7.0 * t[k]);
    Vec at_nodes = trig_eval(f, t);
    CHECK((at_nodes - f).lpNorm<Eigen::Infinity>() < 1e-12);
    const Real q = 0.7713;
    const Real want = 0.3 + std::cos(5.0 * q) - 2.0 * std::sin(7.0 * q);
    CHECK(trig_eval(f, q) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("cosine/sine amplitude extraction") {
    const int n = 32;
    Vec t = ReferenceCircle(n).thetas();
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = 2.0 + 3.0 * std::cos(2.0 * t[k]) - std::sin(7.0 * t[k]);
    auto [a, b] = cos_sin_amplitudes(f);
    CHECK(a[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a[2] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b[7] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(a[5]) < 1e-13);
    CHECK(std::abs(b[2]) < 1e-13);
}

TEST_CASE("sobolev norm normalization is pinned") {
    const int n = 64;
    Vec t = ReferenceCircle(n).thetas();
    for (int m : {1, 3, 10}) {
        Vec f(n);
        for (int k = 0; k < n; ++k) f[k] = std::cos(m * t[k]);
        for (Real s : {0.0, 0.5, 2.0}) {
            const Real want = std::pow(1.0 + Real(m) * Real(m), s / 2.0);
            CHECK(sobolev_norm_theta(f, s) == doctest::Approx(want).epsilon(1e-12));
        }
    }
    Vec c = Vec::Ones(n);
    CHECK(sobolev_norm_theta(c, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("littlewood-paley blocks resolve the identity") {
    const int n = 128;
    Vec f = random_bandlimited(n, 40, 3, true);
    Vec acc = Vec::Zero(n);
    for (int j = 0; j <= lp_max_block(n); ++j) acc += lp_block(f, j);
    CHECK((acc - f).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("littlewood-paley block localizes frequencies") {
    const int n = 128;
    Vec t = ReferenceCircle(n).thetas();
    // mode 12: <m> ~ 12.04, so block j=4 (support 8..32 in <m>) must keep it
    // and blocks j<=2 (support below 8) must kill it
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = std::cos(12.0 * t[k]);
    Vec sum_mid = lp_block(f, 3) + lp_block(f, 4) + lp_block(f, 5);
    CHECK((sum_mid - f).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(lp_block(f, 0).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(lp_block(f, 1).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("random band-limited samples respect the band and seed") {
    const int n = 64;
    Vec f = random_bandlimited(n, 5, 11);
    Vec g = band_limit(f, 5);
    CHECK((f - g).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(std::abs(f.mean()) < 1e-13);  // no mean unless requested
    Vec f2 = random_bandlimited(n, 5, 11);
    CHECK((f - f2).lpNorm<Eigen::Infinity>() == 0.0);
    Vec f3 = random_bandlimited(n, 5, 12);
    CHECK((f - f3).lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("grid constructor rejects odd or tiny sizes") {
    CHECK_THROWS_AS(ReferenceCircle(33), GridMismatch);
    CHECK_THROWS_AS(ReferenceCircle(16), GridMismatch);
    CHECK_NOTHROW(ReferenceCircle(32));
}

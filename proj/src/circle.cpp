#include "droplet/circle.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <random>

namespace droplet {

CVec fourier_coeffs(const Vec& f) {
    const int n = static_cast<int>(f.size());
    Eigen::FFT<Real> fft;
    std::vector<std::complex<Real>> out;
    std::vector<Real> in(f.data(), f.data() + n);
    fft.fwd(out, in);
    CVec c(n);
    for (int k = 0; k < n; ++k) c[k] = out[k] / static_cast<Real>(n);
    return c;
}

Vec fourier_values(const CVec& chat) {
    const int n = static_cast<int>(chat.size());
    Eigen::FFT<Real> fft;
    std::vector<std::complex<Real>> in(n), out;
    for (int k = 0; k < n; ++k) in[k] = chat[k] * static_cast<Real>(n);
    fft.inv(out, in);
    Vec f(n);
    for (int k = 0; k < n; ++k) f[k] = out[k].real();
    return f;
}

Vec apply_multiplier(const Vec& f, const std::function<Real(int)>& g) {
    const int n = static_cast<int>(f.size());
    CVec c = fourier_coeffs(f);
    for (int k = 0; k < n; ++k) c[k] *= g(mode_number(k, n));
    return fourier_values(c);
}

Vec deriv_theta(const Vec& f) {
    const int n = static_cast<int>(f.size());
    CVec c = fourier_coeffs(f);
    for (int k = 0; k < n; ++k) {
        const int m = mode_number(k, n);
        if (2 * std::abs(m) == n)
            c[k] = 0.0;  // Nyquist derivative has no consistent sign
        else
            c[k] *= std::complex<Real>(0.0, static_cast<Real>(m));
    }
    return fourier_values(c);
}

Vec heat_smooth(const Vec& f, Real t) {
    return apply_multiplier(f, [t](int m) { return std::exp(-t * Real(m) * Real(m)); });
}

Vec band_limit(const Vec& f, int m_max) {
    return apply_multiplier(f, [m_max](int m) { return std::abs(m) <= m_max ? 1.0 : 0.0; });
}

Vec trig_eval(const Vec& f, const Vec& angles) {
    const int n = static_cast<int>(f.size());
    CVec c = fourier_coeffs(f);
    Vec out(angles.size());
    for (Eigen::Index q = 0; q < angles.size(); ++q) {
        const Real t = angles[q];
        std::complex<Real> acc = c[0];
        for (int m = 1; m < n / 2; ++m) {
            const std::complex<Real> e(std::cos(m * t), std::sin(m * t));
            acc += c[m] * e + c[n - m] * std::conj(e);
        }
        // Nyquist mode interpolated as a pure cosine (real symmetric choice)
        acc += c[n / 2] * std::cos((n / 2) * t);
        out[q] = acc.real();
    }
    return out;
}

Real trig_eval(const Vec& f, Real angle) {
    Vec a(1);
    a[0] = angle;
    return trig_eval(f, a)[0];
}

std::pair<Vec, Vec> cos_sin_amplitudes(const Vec& f) {
    const int n = static_cast<int>(f.size());
    CVec c = fourier_coeffs(f);
    Vec a(n / 2 + 1), b(n / 2 + 1);
    a[0] = c[0].real();
    b[0] = 0.0;
    for (int m = 1; m < n / 2; ++m) {
        a[m] = 2.0 * c[m].real();
        b[m] = -2.0 * c[m].imag();
    }
    a[n / 2] = c[n / 2].real();
    b[n / 2] = 0.0;
    return {a, b};
}

Real sobolev_norm_theta(const Vec& f, Real s) {
    auto [a, b] = cos_sin_amplitudes(f);
    Real acc = a[0] * a[0];
    for (int m = 1; m < static_cast<int>(a.size()); ++m) {
        const Real w = std::pow(1.0 + Real(m) * Real(m), s);
        acc += w * (a[m] * a[m] + b[m] * b[m]);
    }
    return std::sqrt(acc);
}

Real lp_bump(Real s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    // smooth partition h(t) = B(1-t) / (B(t) + B(1-t)) with B(t) = exp(-1/t)
    const Real t = s - 1.0;
    const Real bt = std::exp(-1.0 / t);
    const Real b1t = std::exp(-1.0 / (1.0 - t));
    return b1t / (bt + b1t);
}

Vec lp_low(const Vec& f, int j) {
    const Real scale = std::pow(2.0, static_cast<Real>(j));
    return apply_multiplier(f, [scale](int m) {
        const Real jb = std::sqrt(1.0 + Real(m) * Real(m));
        return lp_bump(jb / scale);
    });
}

Vec lp_block(const Vec& f, int j) {
    if (j == 0) return lp_low(f, 0);
    return lp_low(f, j) - lp_low(f, j - 1);
}

int lp_max_block(int n) {
    // highest block whose multiplier is not identically 1 on modes <= n/2
    const Real top = std::sqrt(1.0 + Real(n / 2) * Real(n / 2));
    return static_cast<int>(std::ceil(std::log2(top))) + 1;
}

Vec random_bandlimited(int n, int m_max, unsigned seed, bool with_mean) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<Real> uni(-1.0, 1.0);
    Vec t = ReferenceCircle(n).thetas();
    Vec f = Vec::Zero(n);
    if (with_mean) f.array() += uni(rng);
    for (int m = 1; m <= m_max; ++m) {
        const Real decay = 1.0 / (1.0 + Real(m) * Real(m));
        const Real am = uni(rng) * decay, bm = uni(rng) * decay;
        for (int k = 0; k < n; ++k) f[k] += am * std::cos(m * t[k]) + bm * std::sin(m * t[k]);
    }
    return f;
}

}  // namespace droplet

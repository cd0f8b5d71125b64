#pragma once

#include <complex>
#include <functional>

#include "droplet/types.hpp"

namespace droplet {

// Uniform periodic grid theta_k = 2*pi*k/n_theta on the reference unit circle.
struct ReferenceCircle {
    int n_theta;

    explicit ReferenceCircle(int n) : n_theta(n) {
        if (n < 32 || n % 2 != 0)
            throw GridMismatch("n_theta must be even and >= 32, got " + std::to_string(n));
    }

    Vec thetas() const {
        Vec t(n_theta);
        for (int k = 0; k < n_theta; ++k) t[k] = 2.0 * M_PI * k / n_theta;
        return t;
    }
};

// Discrete Fourier conventions, fixed once for the whole artifact:
//   f(theta_k) = sum_{m} chat_m e^{i m theta_k},  chat stored at index
//   k = 0..n-1 with m = k for k <= n/2 and m = k - n otherwise.
CVec fourier_coeffs(const Vec& f);
Vec fourier_values(const CVec& chat);

inline int mode_number(int k, int n) { return (k <= n / 2) ? k : k - n; }

// d/dtheta by the spectral multiplier i*m; the Nyquist mode is annihilated.
Vec deriv_theta(const Vec& f);

// Apply a real multiplier g(m) mode-wise (g acts on the signed mode number).
Vec apply_multiplier(const Vec& f, const std::function<Real(int)>& g);

// Heat semigroup e^{t * d^2/dtheta^2}: mode m scaled by exp(-t m^2).
Vec heat_smooth(const Vec& f, Real t);

// Zero all modes with |m| > m_max.
Vec band_limit(const Vec& f, int m_max);

// Evaluate the trigonometric interpolant at arbitrary angles.
Vec trig_eval(const Vec& f, const Vec& angles);
Real trig_eval(const Vec& f, Real angle);

// Real amplitude pairs: f = a0 + sum_{m>=1} a_m cos(m t) + b_m sin(m t).
// Returns (a, b) with a of size n/2+1 (a[n/2] is the Nyquist cosine), b of
// size n/2+1 with b[0] = b[n/2] = 0.
std::pair<Vec, Vec> cos_sin_amplitudes(const Vec& f);

// Sobolev norm in the theta parameterization:
//   sobolev(s)^2 = a0^2 + sum_{m>=1} (1+m^2)^s (a_m^2 + b_m^2).
// Constants are pinned so that || cos(m theta) ||_{H^s} = (1+m^2)^{s/2}.
Real sobolev_norm_theta(const Vec& f, Real s);

// Smooth Littlewood-Paley bump: 1 on [0,1], 0 on [2,inf), C^inf monotone.
Real lp_bump(Real s);

// P_{<=j} f: multiplier lp_bump(<m> / 2^j) with <m> = sqrt(1+m^2).
Vec lp_low(const Vec& f, int j);

// Dyadic block: P_0 = lp_low(.,0); P_j = lp_low(.,j) - lp_low(.,j-1), j >= 1.
Vec lp_block(const Vec& f, int j);

// Largest dyadic index with a nonempty block on an n-point grid.
int lp_max_block(int n);

// Deterministic band-limited test data: modes 1..m_max with decaying
// amplitudes, seeded. Mean-zero unless with_mean is set.
Vec random_bandlimited(int n, int m_max, unsigned seed, bool with_mean = false);

}  // namespace droplet

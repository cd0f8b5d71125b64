#include "droplet/cheb.hpp"

#include <cmath>

namespace droplet {

ChebRadial::ChebRadial(int n_rho) : n(n_rho) {
    if (n < 4) throw GridMismatch("radial grid needs at least 4 nodes");
    nodes.resize(n);
    const Real pi = std::acos(-1.0);
    for (int j = 0; j < n; ++j)
        nodes[j] = 0.5 * (1.0 + std::cos(2.0 * pi * Real(n - 1 - j) / Real(2 * n - 1)));
    nodes[n - 1] = 1.0;

    // Barycentric weights w_i = 1 / prod_{j != i} (x_i - x_j), computed in
    // log space to avoid under/overflow, then max-normalized (common scale
    // cancels in both interpolation and differentiation).
    Vec logw(n);
    std::vector<int> sign(n, 1);
    for (int i = 0; i < n; ++i) {
        Real acc = 0.0;
        int s = 1;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const Real d = nodes[i] - nodes[j];
            acc += std::log(std::abs(d));
            if (d < 0) s = -s;
        }
        logw[i] = -acc;
        sign[i] = s;
    }
    const Real lmax = logw.maxCoeff();
    bary_w.resize(n);
    for (int i = 0; i < n; ++i) bary_w[i] = sign[i] * std::exp(logw[i] - lmax);

    D.resize(n, n);
    for (int i = 0; i < n; ++i) {
        Real diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            D(i, j) = (bary_w[j] / bary_w[i]) / (nodes[i] - nodes[j]);
            diag -= D(i, j);
        }
        D(i, i) = diag;
    }

    // Quadrature weights: solve V^T q = M where V_{jk} = T_k(2 rho_j - 1)
    // and M_k = \int_0^1 T_k(2r-1) dr = 1/(1-k^2) for even k, 0 for odd k.
    Mat V(n, n);
    for (int j = 0; j < n; ++j) {
        const Real x = 2.0 * nodes[j] - 1.0;
        V(j, 0) = 1.0;
        if (n > 1) V(j, 1) = x;
        for (int k = 2; k < n; ++k) V(j, k) = 2.0 * x * V(j, k - 1) - V(j, k - 2);
    }
    Vec M = Vec::Zero(n);
    for (int k = 0; k < n; k += 2) M[k] = 1.0 / (1.0 - Real(k) * Real(k));
    quad_w = V.transpose().partialPivLu().solve(M);
}

Vec ChebRadial::cardinal(Real rho) const {
    Vec c = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        const Real d = rho - nodes[j];
        if (std::abs(d) < 1e-14) {
            c[j] = 1.0;
            return c;
        }
    }
    Real denom = 0.0;
    for (int j = 0; j < n; ++j) {
        c[j] = bary_w[j] / (rho - nodes[j]);
        denom += c[j];
    }
    c /= denom;
    return c;
}

Real ChebRadial::eval(const Vec& p, Real rho) const {
    if (p.size() != n) throw GridMismatch("radial value count mismatch");
    return cardinal(rho).dot(p);
}

}  // namespace droplet

#pragma once

#include "droplet/types.hpp"

namespace droplet {

// Radial collocation grid on (0,1]: Chebyshev-Gauss-Radau points with the
// fixed endpoint at rho = 1 and no node at the origin.  Interpolation,
// differentiation and quadrature all act on values at these nodes.
//
//   rho_j = (1 + cos(2*pi*(n-1-j)/(2n-1))) / 2,   j = 0..n-1  (ascending)
//
// so rho_{n-1} = 1 exactly and rho_0 = O(1/n^2) > 0.
struct ChebRadial {
    int n = 0;
    Vec nodes;    // ascending in (0,1], last entry exactly 1
    Vec bary_w;   // barycentric weights, max-normalized
    Mat D;        // differentiation matrix: (D f)_i ~ f'(rho_i)
    Vec quad_w;   // integration weights: sum_j quad_w[j] f(rho_j) ~ \int_0^1 f

    explicit ChebRadial(int n_rho);

    // Interpolate node values p at an arbitrary point; valid on (0,1] and in
    // a short extrapolation band above 1 (callers guard the band width).
    Real eval(const Vec& p, Real rho) const;

    // Cardinal weights c with c.dot(p) == eval(p, rho) for all p.
    Vec cardinal(Real rho) const;
};

}  // namespace droplet

#pragma once

#include "droplet/circle.hpp"
#include "droplet/types.hpp"

#include <vector>

namespace droplet {

inline constexpr Real kDefaultCollarEps = 0.25;
inline constexpr Real kDefaultCollarDelta = 0.45;
inline constexpr Real kDefaultRMin = 0.3;

// Star-shaped boundary curve given as a radial graph over the unit circle:
//   gamma(theta) = (1 + eta(theta)) (cos theta, sin theta).
// eta is stored exactly as supplied (node values are the source of truth);
// eta_hat is the matching discrete Fourier transform.  Construction enforces
// star-shapedness (1 + eta >= r_min); collar membership is a soft condition
// queried via collar_seminorm / in_collar so the run monitor owns the policy.
struct BoundaryGraph {
    ReferenceCircle circle;
    Vec eta;
    CVec eta_hat;
    Real collar_eps = kDefaultCollarEps;
    Real collar_delta = kDefaultCollarDelta;

    explicit BoundaryGraph(Vec eta_values, Real eps = kDefaultCollarEps,
                           Real delta = kDefaultCollarDelta, Real r_min = kDefaultRMin);

    int n_theta() const { return circle.n_theta; }
    Vec thetas() const { return circle.thetas(); }

    Vec radius() const { return eta.array() + 1.0; }      // R = 1 + eta at nodes
    Vec radius_dtheta() const { return deriv_theta(eta); }
    Vec radius_d2theta() const { return deriv_theta(deriv_theta(eta)); }

    Mat2X points() const;    // gamma(theta_k)
    Mat2X tangents() const;  // d gamma / d theta (not normalized)
    Vec speed() const;       // |d gamma / d theta| = sqrt(R^2 + R'^2)
    Real length() const;     // total arclength
};

// Unit outward normals at the nodes (rotation of the unit tangent so that
// the circle's normal is radial-outward).
Mat2X outward_normal(const BoundaryGraph& g);

// Signed curvature of the boundary curve, positive for a disk:
//   kappa = (R^2 + 2 R'^2 - R R'') / (R^2 + R'^2)^{3/2}.
Vec mean_curvature(const BoundaryGraph& g);

// Region labels for the pointwise-minimum boundary: A marks nodes where the
// first graph is strictly lower, Ah where the second is, Common the tie band.
enum class RegionTag { A, Ah, Common };

struct IntersectionGraph {
    BoundaryGraph graph;
    std::vector<RegionTag> tags;
};

Real tie_tolerance(const BoundaryGraph& a, const BoundaryGraph& b);
IntersectionGraph intersection_graph(const BoundaryGraph& a, const BoundaryGraph& b);

// Norms of boundary node data.  The Sobolev norm is computed in the theta
// parameterization with the normalization pinned in circle.hpp; the Hölder
// norms use arclength distance along the curve (sup |f| plus the pairwise
// quotient seminorm); the Besov variant uses dyadic frequency blocks.
Real boundary_sobolev(const BoundaryScalar& f, Real s);
Real boundary_holder(const BoundaryScalar& f, const BoundaryGraph& g, Real alpha);
Real boundary_lipschitz(const BoundaryScalar& f, const BoundaryGraph& g);
Real besov_holder(const BoundaryScalar& f, Real alpha);

// Boundary integral of node data against arclength measure.
Real boundary_integrate(const BoundaryScalar& f, const BoundaryGraph& g);

// Dyadic-block seminorm of eta' at the collar exponent.  This is the
// monitored collar quantity; the full inhomogeneous C^{1,alpha} norm of eta
// (reported in diagnostics) is holder_c1 below.
Real collar_seminorm(const BoundaryGraph& g);
bool in_collar(const BoundaryGraph& g);
Real holder_c1(const BoundaryGraph& g, Real alpha);

// Conservative lower bound for the uniform interior/exterior ball-graph
// scale: the largest radius on a fixed multiplicative candidate grid such
// that every boundary ball of that radius cuts the curve in one arc that is
// a graph over the tangent line at the center.
Real thickness(const BoundaryGraph& g);

Real enclosed_area(const BoundaryGraph& g);

}  // namespace droplet

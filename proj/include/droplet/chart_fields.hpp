#pragma once

#include "droplet/boundary_geometry.hpp"
#include "droplet/cheb.hpp"
#include "droplet/types.hpp"

#include <functional>
#include <memory>

namespace droplet {

inline constexpr int kMaxDerivativeOrder = 4;

// Boundary-fitted polar chart (rho, theta) -> (1+eta(theta)) rho (cos, sin).
// Radial nodes exclude the origin and include rho = 1 exactly, so the last
// grid row of any field is its boundary trace.  All metric data is cached at
// construction; the chart is immutable afterwards.
struct DiskChart {
    BoundaryGraph gamma;
    ChebRadial radial;

    // grid coordinates (n_rho x n_theta), row j = radius index, col k = angle
    Mat x, y;
    // inverse-Jacobian entries: d/dx = drdx * d_rho + dtdx * d_theta, etc.
    Mat drdx, drdy, dtdx, dtdy;
    Mat detJ;     // rho * R(theta)^2 > 0
    Mat quad_w;   // tensor quadrature weights including |det J|

    DiskChart(BoundaryGraph g, int n_rho);

    int n_rho() const { return radial.n; }
    int n_theta() const { return gamma.n_theta(); }

    // Width of the radial extrapolation collar beyond rho = 1 (two last-cell
    // spacings); callers may evaluate up to rho = 1 + band.
    Real extrapolation_band() const {
        return 2.0 * (radial.nodes[radial.n - 1] - radial.nodes[radial.n - 2]);
    }
};

using ChartPtr = std::shared_ptr<const DiskChart>;

ChartPtr make_chart(BoundaryGraph g, int n_rho);

// Scalar samples on the chart's tensor grid: v(j, k) = f(rho_j, theta_k).
struct Field {
    ChartPtr chart;
    Mat v;

    Field() = default;
    Field(ChartPtr c, Mat vals);

    int n_rho() const { return static_cast<int>(v.rows()); }
    int n_theta() const { return static_cast<int>(v.cols()); }
    BoundaryScalar boundary_trace() const { return v.row(v.rows() - 1).transpose(); }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(Real s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Real s, Field a);
Field multiply(const Field& a, const Field& b);  // pointwise product

struct VectorField {
    Field x, y;

    VectorField() = default;
    VectorField(Field fx, Field fy);
    const ChartPtr& chart() const { return x.chart; }
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(Real s, VectorField a);

// Sample a Cartesian-coordinate function on the grid.
Field make_field(const ChartPtr& c, const std::function<Real(Real, Real)>& f);
VectorField make_vector_field(const ChartPtr& c,
                              const std::function<Vec2(Real, Real)>& f);
Field zero_field(const ChartPtr& c);

// Differential calculus in Cartesian components: theta direction is spectral,
// rho direction uses the chart's collocation derivative, combined through the
// inverse Jacobian.  laplacian is literally divergence(gradient(f)).
Field dx(const Field& f);
Field dy(const Field& f);
VectorField gradient(const Field& f);
Field divergence(const VectorField& u);
Field curl2d(const VectorField& u);
Field laplacian(const Field& f);
// (u . grad) applied to a scalar and to a vector field
Field advect(const VectorField& u, const Field& f);
VectorField advect(const VectorField& u, const VectorField& w);

Real integrate(const Field& f);
Real inner(const Field& a, const Field& b);      // L2 pairing
Real l2_norm(const Field& f);
Real interior_sobolev_norm(const Field& f, int k);

// Tensor-grid interpolation: radial barycentric along each ray, then
// trigonometric in theta.  rho may lie in the extrapolation collar.
Real eval_polar(const Field& f, Real rho, Real theta);
// Evaluate at Cartesian points (2 x P); throws DomainNotContained when a
// point leaves the chart's domain by more than the extrapolation collar.
Vec eval_xy(const Field& f, const Mat2X& pts);

// Resample onto the chart of another boundary graph.  Target grid points
// must lie inside the source domain up to the extrapolation collar.
Field restrict_field(const Field& f, const ChartPtr& target);
VectorField restrict_vector(const VectorField& u, const ChartPtr& target);

// Boundary traces of vector fields against the target graph's normal/tangent.
BoundaryScalar normal_trace(const VectorField& u);

}  // namespace droplet

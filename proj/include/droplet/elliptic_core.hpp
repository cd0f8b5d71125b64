#pragma once

#include "droplet/chart_fields.hpp"

#include <Eigen/LU>

#include <memory>
#include <vector>

namespace droplet {

inline constexpr Real kDefaultSolverTol = 1e-7;
inline constexpr int kDefaultMMax = 4;

// Dense matrix of the composed operator divergence(gradient(.)), unknowns in
// column-major order (radial index fastest).  No boundary rows are modified.
Mat assemble_laplacian_matrix(const DiskChart& chart);

struct DtNOperator;

// Interior Poisson solver with Dirichlet boundary data on a chart.
//
// The discrete operator is exactly the field-calculus composition
// divergence(gradient(.)), assembled as a dense matrix and LU-factorized with
// row equilibration.  On charts with constant eta (disks of any radius) the
// operator block-diagonalizes over Fourier modes in theta and the solver uses
// per-mode radial factorizations instead; the two paths agree on all modes
// |m| <= n_theta/2 - 2 (the top two modes see the Nyquist-annihilated
// derivative in the composition).
class DirichletSolver {
public:
    explicit DirichletSolver(ChartPtr chart, Real tol = kDefaultSolverTol);

    const ChartPtr& chart() const { return chart_; }
    Real tol() const { return tol_; }

    // Solve  div grad u = rhs  in the interior, u = bc at rho = 1.
    // Checks the equation residual and throws ResidualTooLarge on failure.
    Field solve(const Field& rhs, const BoundaryScalar& bc) const;
    Field harmonic_extension(const BoundaryScalar& bc) const;

    // Outward normal derivative of a field at the boundary nodes, using the
    // collocation derivative of the interpolant (spectrally one-sided).
    BoundaryScalar normal_derivative(const Field& u) const;

private:
    Field solve_unchecked(const Field& rhs, const BoundaryScalar& bc) const;
    Field solve_dense(const Field& rhs, const BoundaryScalar& bc) const;
    Field solve_disk(const Field& rhs, const BoundaryScalar& bc) const;
    void check_residual(const Field& u, const Field& rhs, const BoundaryScalar& bc) const;

    ChartPtr chart_;
    Real tol_;
    bool disk_path_ = false;

    // dense path
    std::shared_ptr<Eigen::PartialPivLU<Mat>> lu_;
    Vec row_scale_;

    // disk path: one radial factorization per |m|, with its row scaling
    std::vector<std::shared_ptr<Eigen::PartialPivLU<Mat>>> mode_lu_;
    std::vector<Vec> mode_scale_;

    friend DtNOperator assemble_dtn(const DirichletSolver& solver);
};

// Dirichlet-to-Neumann map on the boundary nodes: g -> n . grad(H g)|_G.
// Assembled by pushing the trigonometric mode basis through the solver.
// Responses stay accurate only up to a mode cap set by the radial
// resolution; the asymmetry of the computed arclength pairing is measured
// band by band to locate that cap.  Above it the operator is completed by
// its diagonal symbol (lambda ~ slope * m), below it the computed coupling
// is kept.  The result is then symmetrized in the arclength inner product
// and the constant direction is deflated exactly, so the exposed matrix is
// self-adjoint, nonnegative, and kills constants by construction; the raw
// asymmetry is kept as metadata.
struct DtNOperator {
    BoundaryGraph gamma;
    Mat N;             // nodal action (exactly self-adjoint in arc_w pairing)
    Vec arc_w;         // arclength quadrature weights (speed * dtheta)
    Vec lambda;        // eigenvalues, ascending
    Mat modes;         // nodal eigenvectors, arc_w-orthonormal columns
    Real sym_defect;   // pre-symmetrization pairing asymmetry over the kept band
    int trusted_mode_cap;  // responses accurate to ~1e-8, relative, below this
    int kept_mode_cap;     // computed (not symbol-completed) responses below this

    Real arclength_inner(const BoundaryScalar& f, const BoundaryScalar& g) const {
        return (arc_w.array() * f.array() * g.array()).sum();
    }
};

DtNOperator assemble_dtn(const DirichletSolver& solver);

BoundaryScalar apply_dtn(const DtNOperator& op, const BoundaryScalar& g);
BoundaryScalar apply_dtn_power(const DtNOperator& op, const BoundaryScalar& g, int m,
                               int m_max = kDefaultMMax);
// Spectral cutoff projection onto eigenmodes with lambda <= lambda_cut.
BoundaryScalar dtn_spectral_projection(const DtNOperator& op, const BoundaryScalar& g,
                                       Real lambda_cut);
// Pseudo-inverse on (arclength-)mean-zero data; the kernel mode is excluded.
BoundaryScalar dtn_inverse_on_mean_zero(const DtNOperator& op, const BoundaryScalar& g);

// Product-rule defect of the DtN map:
//   N(fg) - f Ng - g Nf + 2 n.grad Delta^{-1}( grad Hf . grad Hg )
// computed with every term independently discretized; returns the sup norm.
Real check_dtn_leibniz(const DirichletSolver& solver, const DtNOperator& op,
                       const BoundaryScalar& f, const BoundaryScalar& g);

}  // namespace droplet

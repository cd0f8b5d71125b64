#include "droplet/elliptic_core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>

namespace droplet {

namespace {

// Dense matrix of the spectral theta-derivative (same map as deriv_theta).
Mat deriv_theta_matrix(int n) {
    Mat Dth(n, n);
    Vec e = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
        e[k] = 1.0;
        Dth.col(k) = deriv_theta(e);
        e[k] = 0.0;
    }
    return Dth;
}

int flat(int j, int k, int nr) { return j + nr * k; }

std::string fmt(Real x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

}  // namespace

// Dense matrix of the composed operator divergence(gradient(.)) on the
// chart's tensor grid, unknowns in column-major (radial index fastest).
// Expanded from D_x = diag(a) Mr + diag(c) Mt (and the y analogue) where
// Mr = I (x) D acts radially and Mt = Dth (x) I acts in theta.
Mat assemble_laplacian_matrix(const DiskChart& c) {
    const int nr = c.n_rho(), nt = c.n_theta(), N = nr * nt;
    const Mat& D = c.radial.D;
    Mat Dth = deriv_theta_matrix(nt);
    Mat L = Mat::Zero(N, N);

    // radial-radial terms: diagonal in theta
    for (int k = 0; k < nt; ++k) {
        Mat Ax = c.drdx.col(k).asDiagonal() * D;
        Mat Ay = c.drdy.col(k).asDiagonal() * D;
        L.block(nr * k, nr * k, nr, nr) += Ax * Ax + Ay * Ay;
    }

    // radial-theta cross terms
    std::vector<Mat> P(nt);
    for (int k = 0; k < nt; ++k)
        P[k] = c.drdx.col(k).asDiagonal() * D * c.dtdx.col(k).asDiagonal() +
               c.drdy.col(k).asDiagonal() * D * c.dtdy.col(k).asDiagonal();
    for (int k = 0; k < nt; ++k)
        for (int kp = 0; kp < nt; ++kp) {
            const Real w = Dth(k, kp);
            if (w == 0.0) continue;
            Vec s = c.dtdx.col(k).cwiseProduct(c.drdx.col(kp)) +
                    c.dtdy.col(k).cwiseProduct(c.drdy.col(kp));
            L.block(nr * k, nr * kp, nr, nr) += w * (P[k] + Mat(s.asDiagonal() * D));
        }

    // theta-theta terms: diagonal in rho
    for (int j = 0; j < nr; ++j) {
        Mat Mx = Dth * c.dtdx.row(j).asDiagonal() * Dth;
        Mat My = Dth * c.dtdy.row(j).asDiagonal() * Dth;
        for (int k = 0; k < nt; ++k)
            for (int kp = 0; kp < nt; ++kp)
                L(flat(j, k, nr), flat(j, kp, nr)) +=
                    c.dtdx(j, k) * Mx(k, kp) + c.dtdy(j, k) * My(k, kp);
    }
    return L;
}

DirichletSolver::DirichletSolver(ChartPtr chart, Real tol)
    : chart_(std::move(chart)), tol_(tol) {
    const DiskChart& c = *chart_;
    const int nr = c.n_rho(), nt = c.n_theta();
    const Vec& eta = c.gamma.eta;
    disk_path_ = (eta.array() - eta.mean()).abs().maxCoeff() < 1e-14;

    if (disk_path_) {
        // constant radius: the operator decouples per Fourier mode into
        // (1/R^2)(D^2 + diag(1/rho) D - m^2 diag(1/rho^2))
        const Real R = 1.0 + eta.mean();
        const Vec& rho = c.radial.nodes;
        Mat D2 = c.radial.D * c.radial.D;
        Mat base = D2 + Mat(rho.cwiseInverse().asDiagonal() * c.radial.D);
        mode_lu_.resize(nt / 2 + 1);
        mode_scale_.resize(nt / 2 + 1);
        for (int m = 0; m <= nt / 2; ++m) {
            Mat A = base;
            A -= Real(m) * Real(m) * Mat(rho.cwiseInverse().cwiseAbs2().asDiagonal());
            A /= R * R;
            A.row(nr - 1).setZero();
            A(nr - 1, nr - 1) = 1.0;
            Vec s(nr);
            for (int j = 0; j < nr; ++j) {
                s[j] = 1.0 / A.row(j).cwiseAbs().maxCoeff();
                A.row(j) *= s[j];
            }
            mode_scale_[m] = s;
            mode_lu_[m] = std::make_shared<Eigen::PartialPivLU<Mat>>(A);
        }
        return;
    }

    Mat L = assemble_laplacian_matrix(c);
    const int N = nr * nt;
    for (int k = 0; k < nt; ++k) {
        L.row(flat(nr - 1, k, nr)).setZero();
        L(flat(nr - 1, k, nr), flat(nr - 1, k, nr)) = 1.0;
    }
    row_scale_.resize(N);
    for (int i = 0; i < N; ++i) {
        row_scale_[i] = 1.0 / L.row(i).cwiseAbs().maxCoeff();
        L.row(i) *= row_scale_[i];
    }
    lu_ = std::make_shared<Eigen::PartialPivLU<Mat>>(std::move(L));
}

Field DirichletSolver::solve_dense(const Field& rhs, const BoundaryScalar& bc) const {
    const int nr = chart_->n_rho(), nt = chart_->n_theta(), N = nr * nt;
    Vec b(N);
    for (int k = 0; k < nt; ++k) {
        for (int j = 0; j < nr - 1; ++j) b[flat(j, k, nr)] = rhs.v(j, k);
        b[flat(nr - 1, k, nr)] = bc[k];
    }
    b.array() *= row_scale_.array();
    Vec u = lu_->solve(b);
    Mat out(nr, nt);
    for (int k = 0; k < nt; ++k)
        for (int j = 0; j < nr; ++j) out(j, k) = u[flat(j, k, nr)];
    out.row(nr - 1) = bc.transpose();
    Field sol(chart_, std::move(out));

    // one refinement pass against the composed operator; the factorization
    // alone loses accuracy as the radial nodes cluster toward the origin
    Mat r = rhs.v - laplacian(sol).v;
    Vec br = Vec::Zero(N);
    for (int k = 0; k < nt; ++k)
        for (int j = 0; j < nr - 1; ++j) br[flat(j, k, nr)] = r(j, k);
    br.array() *= row_scale_.array();
    Vec du = lu_->solve(br);
    for (int k = 0; k < nt; ++k)
        for (int j = 0; j < nr - 1; ++j) sol.v(j, k) += du[flat(j, k, nr)];
    return sol;
}

Field DirichletSolver::solve_disk(const Field& rhs, const BoundaryScalar& bc) const {
    const int nr = chart_->n_rho(), nt = chart_->n_theta();
    Eigen::MatrixXcd F(nr, nt);
    for (int j = 0; j < nr; ++j) F.row(j) = fourier_coeffs(rhs.v.row(j).transpose()).transpose();
    CVec bch = fourier_coeffs(bc);
    Eigen::MatrixXcd U(nr, nt);
    for (int k = 0; k < nt; ++k) {
        const int m = std::abs(mode_number(k, nt));
        CVec col = F.col(k);
        col[nr - 1] = bch[k];
        // match the row equilibration baked into the factorization
        Vec re = mode_lu_[m]->solve(Vec(mode_scale_[m].cwiseProduct(col.real())));
        Vec im = mode_lu_[m]->solve(Vec(mode_scale_[m].cwiseProduct(col.imag())));
        U.col(k) = re + std::complex<Real>(0, 1) * im;
    }
    Mat out(nr, nt);
    for (int j = 0; j < nr; ++j)
        out.row(j) = fourier_values(U.row(j).transpose()).transpose();
    out.row(nr - 1) = bc.transpose();
    return Field(chart_, std::move(out));
}

Field DirichletSolver::solve_unchecked(const Field& rhs, const BoundaryScalar& bc) const {
    if (rhs.chart.get() != chart_.get()) throw GridMismatch("rhs on another chart");
    if (bc.size() != chart_->n_theta()) throw GridMismatch("boundary data size");
    return disk_path_ ? solve_disk(rhs, bc) : solve_dense(rhs, bc);
}

void DirichletSolver::check_residual(const Field& u, const Field& rhs,
                                     const BoundaryScalar& bc) const {
    const int nr = chart_->n_rho(), nt = chart_->n_theta();
    Mat r = laplacian(u).v - rhs.v;
    if (disk_path_) {
        // the per-mode solve and the composed operator agree except on the
        // two highest modes, where the composition sees Nyquist clipping
        for (int j = 0; j < nr; ++j)
            r.row(j) = band_limit(r.row(j).transpose(), nt / 2 - 2).transpose();
    }
    const Real resid = r.topRows(nr - 1).cwiseAbs().maxCoeff();
    const Real scale = std::max({1.0, rhs.v.cwiseAbs().maxCoeff(), bc.cwiseAbs().maxCoeff()});
    if (!(resid < tol_ * scale))
        throw ResidualTooLarge("dirichlet solve residual " + fmt(resid) + " vs budget " +
                               fmt(tol_ * scale));
}

Field DirichletSolver::solve(const Field& rhs, const BoundaryScalar& bc) const {
    Field u = solve_unchecked(rhs, bc);
    check_residual(u, rhs, bc);
    return u;
}

Field DirichletSolver::harmonic_extension(const BoundaryScalar& bc) const {
    return solve(zero_field(chart_), bc);
}

BoundaryScalar DirichletSolver::normal_derivative(const Field& u) const {
    VectorField g = gradient(u);
    return normal_trace(g);
}

DtNOperator assemble_dtn(const DirichletSolver& solver) {
    const ChartPtr& chart = solver.chart();
    const int nt = chart->n_theta();
    const int half = nt / 2;
    const Vec t = chart->gamma.thetas();
    Vec arc_w = chart->gamma.speed() * (2.0 * std::acos(-1.0) / nt);

    // real trig basis, columns ordered by mode: 1, cos t, sin t, ..., cos(half t)
    Mat T(nt, nt);
    std::vector<int> mode_of(nt);
    T.col(0).setOnes();
    mode_of[0] = 0;
    for (int m = 1; m < half; ++m) {
        T.col(2 * m - 1) = (Real(m) * t.array()).cos();
        T.col(2 * m) = (Real(m) * t.array()).sin();
        mode_of[2 * m - 1] = mode_of[2 * m] = m;
    }
    T.col(nt - 1) = (Real(half) * t.array()).cos();
    mode_of[nt - 1] = half;

    // normal derivatives of the harmonic extensions of each basis column
    Mat R(nt, nt);
    const Field zero = zero_field(chart);
    for (int b = 0; b < nt; ++b)
        R.col(b) = solver.normal_derivative(solver.solve_unchecked(zero, T.col(b)));

    // asymmetry of the arclength pairing <N t_a, t_b>, band by band: the
    // responses are trustworthy only while the pairing stays symmetric
    Mat G = R.transpose() * arc_w.asDiagonal() * T;
    Vec defect = Vec::Zero(half + 1), band_scale = Vec::Zero(half + 1);
    for (int a = 0; a < nt; ++a)
        for (int b = 0; b <= a; ++b) {
            const int m = std::max(mode_of[a], mode_of[b]);
            defect[m] = std::max(defect[m], std::abs(G(a, b) - G(b, a)));
            band_scale[m] = std::max(band_scale[m], std::abs(G(a, b)));
        }
    for (int m = 1; m <= half; ++m) {
        defect[m] = std::max(defect[m], defect[m - 1]);
        band_scale[m] = std::max(band_scale[m], band_scale[m - 1]);
    }
    int kept = 0, trusted = 0;
    for (int m = 1; m <= half - 2; ++m) {
        if (defect[m] <= 1e-4 * band_scale[m]) kept = m;
        if (defect[m] <= 1e-8 * band_scale[m]) trusted = m;
    }
    if (kept < 2)
        throw ResidualTooLarge("DtN responses unusable: pairing asymmetry " +
                               fmt(defect[2]) + " at scale " + fmt(band_scale[2]));

    // symbol slope from the top of the kept band (exact 1/R on a disk)
    Real slope = 0.0;
    int nslope = 0;
    for (int b = 0; b < nt; ++b)
        if (mode_of[b] == kept || mode_of[b] == kept - 1) {
            const Real nrm = T.col(b).cwiseAbs2().dot(arc_w);
            slope += G(b, b) / (nrm * mode_of[b]);
            ++nslope;
        }
    slope /= nslope;

    // mode-space action: computed coupling inside the kept band, diagonal
    // symbol above it; Tpinv inverts the basis under the uniform pairing
    Mat Tpinv = T.transpose();
    for (int b = 0; b < nt; ++b) Tpinv.row(b) /= T.col(b).squaredNorm();
    Mat Mresp = Mat::Zero(nt, nt);
    for (int b = 0; b < nt; ++b) {
        if (mode_of[b] <= kept) {
            Vec coef = Tpinv * R.col(b);
            for (int a = 0; a < nt; ++a)
                if (mode_of[a] <= kept) Mresp(a, b) = coef[a];
        } else {
            Mresp(b, b) = slope * mode_of[b];
        }
    }
    Mat Nraw = T * Mresp * Tpinv;

    // symmetrize in the arclength inner product and deflate constants
    Vec sqw = arc_w.cwiseSqrt();
    Vec isqw = sqw.cwiseInverse();
    Mat S = sqw.asDiagonal() * Nraw * isqw.asDiagonal();
    S = 0.5 * (S + S.transpose().eval());
    Vec q = sqw / sqw.norm();
    Mat P = Mat::Identity(nt, nt) - q * q.transpose();
    S = P * S * P;

    Eigen::SelfAdjointEigenSolver<Mat> eig(S);
    if (eig.info() != Eigen::Success) throw EigenFailure("DtN eigendecomposition");
    Vec lambda = eig.eigenvalues();
    if (lambda[0] < -1e-8)
        throw EigenFailure("negative DtN eigenvalue " + fmt(lambda[0]));
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], 0.0);

    return DtNOperator{chart->gamma,
                       Mat(isqw.asDiagonal() * S * sqw.asDiagonal()),
                       std::move(arc_w),
                       std::move(lambda),
                       Mat(isqw.asDiagonal() * eig.eigenvectors()),
                       defect[kept],
                       trusted,
                       kept};
}

BoundaryScalar apply_dtn(const DtNOperator& op, const BoundaryScalar& g) {
    if (g.size() != op.N.rows()) throw GridMismatch("boundary data size");
    return op.N * g;
}

BoundaryScalar apply_dtn_power(const DtNOperator& op, const BoundaryScalar& g, int m,
                               int m_max) {
    if (m < 0 || m > m_max)
        throw PowerTooHigh("requested power " + std::to_string(m) + " with cap " +
                           std::to_string(m_max));
    BoundaryScalar out = g;
    for (int i = 0; i < m; ++i) out = op.N * out;
    return out;
}

BoundaryScalar dtn_spectral_projection(const DtNOperator& op, const BoundaryScalar& g,
                                       Real lambda_cut) {
    if (g.size() != op.N.rows()) throw GridMismatch("boundary data size");
    Vec coef = op.modes.transpose() * op.arc_w.cwiseProduct(g);
    for (Eigen::Index i = 0; i < coef.size(); ++i)
        if (op.lambda[i] > lambda_cut) coef[i] = 0.0;
    return op.modes * coef;
}

BoundaryScalar dtn_inverse_on_mean_zero(const DtNOperator& op, const BoundaryScalar& g) {
    if (g.size() != op.N.rows()) throw GridMismatch("boundary data size");
    const Real mean_tol = 1e-10 * g.cwiseAbs().maxCoeff();
    const Real integral = op.arc_w.dot(g);
    if (std::abs(integral) > mean_tol)
        throw NonzeroMean("boundary integral " + fmt(integral));
    Vec coef = op.modes.transpose() * op.arc_w.cwiseProduct(g);
    const Real floor = std::max(1e-8, 1e-12 * op.lambda.maxCoeff());
    for (Eigen::Index i = 0; i < coef.size(); ++i)
        coef[i] = (op.lambda[i] > floor) ? coef[i] / op.lambda[i] : 0.0;
    return op.modes * coef;
}

Real check_dtn_leibniz(const DirichletSolver& solver, const DtNOperator& op,
                       const BoundaryScalar& f, const BoundaryScalar& g) {
    BoundaryScalar lhs = apply_dtn(op, f.cwiseProduct(g));
    Field Hf = solver.harmonic_extension(f);
    Field Hg = solver.harmonic_extension(g);
    VectorField gf = gradient(Hf), gg = gradient(Hg);
    Field dot = multiply(gf.x, gg.x) + multiply(gf.y, gg.y);
    Field u = solver.solve(dot, BoundaryScalar::Zero(f.size()));
    BoundaryScalar corr = solver.normal_derivative(u);
    BoundaryScalar rhs = f.cwiseProduct(apply_dtn(op, g)) + g.cwiseProduct(apply_dtn(op, f)) -
                         2.0 * corr;
    return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

}  // namespace droplet

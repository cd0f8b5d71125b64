#include "droplet/chart_fields.hpp"

#include <cmath>

namespace droplet {

namespace {

Mat dtheta_rows(const Mat& v) {
    Mat out(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.rows(); ++j)
        out.row(j) = deriv_theta(v.row(j).transpose()).transpose();
    return out;
}

void require_same_chart(const Field& a, const Field& b) {
    if (a.chart.get() != b.chart.get()) throw GridMismatch("fields on different charts");
}

}  // namespace

DiskChart::DiskChart(BoundaryGraph g, int nr) : gamma(std::move(g)), radial(nr) {
    const int nt = gamma.n_theta();
    Vec t = gamma.thetas(), R = gamma.radius(), Rp = gamma.radius_dtheta();
    const Real dtheta = 2.0 * std::acos(-1.0) / nt;

    x.resize(nr, nt); y.resize(nr, nt);
    drdx.resize(nr, nt); drdy.resize(nr, nt);
    dtdx.resize(nr, nt); dtdy.resize(nr, nt);
    detJ.resize(nr, nt); quad_w.resize(nr, nt);

    for (int k = 0; k < nt; ++k) {
        const Real c = std::cos(t[k]), s = std::sin(t[k]);
        for (int j = 0; j < nr; ++j) {
            const Real rho = radial.nodes[j];
            x(j, k) = R[k] * rho * c;
            y(j, k) = R[k] * rho * s;
            drdx(j, k) = (Rp[k] * s + R[k] * c) / (R[k] * R[k]);
            drdy(j, k) = (R[k] * s - Rp[k] * c) / (R[k] * R[k]);
            dtdx(j, k) = -s / (rho * R[k]);
            dtdy(j, k) = c / (rho * R[k]);
            detJ(j, k) = rho * R[k] * R[k];
            quad_w(j, k) = radial.quad_w[j] * detJ(j, k) * dtheta;
        }
    }
    if (detJ.minCoeff() <= 0.0) throw ChartSingular("nonpositive Jacobian determinant");
}

ChartPtr make_chart(BoundaryGraph g, int n_rho) {
    return std::make_shared<const DiskChart>(std::move(g), n_rho);
}

Field::Field(ChartPtr c, Mat vals) : chart(std::move(c)), v(std::move(vals)) {
    if (!chart) throw GridMismatch("field without chart");
    if (v.rows() != chart->n_rho() || v.cols() != chart->n_theta())
        throw GridMismatch("field dimensions do not match chart");
}

Field& Field::operator+=(const Field& o) { require_same_chart(*this, o); v += o.v; return *this; }
Field& Field::operator-=(const Field& o) { require_same_chart(*this, o); v -= o.v; return *this; }
Field& Field::operator*=(Real s) { v *= s; return *this; }

Field operator+(Field a, const Field& b) { a += b; return a; }
Field operator-(Field a, const Field& b) { a -= b; return a; }
Field operator*(Real s, Field a) { a *= s; return a; }

Field multiply(const Field& a, const Field& b) {
    require_same_chart(a, b);
    return Field(a.chart, a.v.cwiseProduct(b.v));
}

VectorField::VectorField(Field fx, Field fy) : x(std::move(fx)), y(std::move(fy)) {
    require_same_chart(x, y);
}

VectorField operator+(VectorField a, const VectorField& b) { a.x += b.x; a.y += b.y; return a; }
VectorField operator-(VectorField a, const VectorField& b) { a.x -= b.x; a.y -= b.y; return a; }
VectorField operator*(Real s, VectorField a) { a.x *= s; a.y *= s; return a; }

Field make_field(const ChartPtr& c, const std::function<Real(Real, Real)>& f) {
    Mat v(c->n_rho(), c->n_theta());
    for (int j = 0; j < c->n_rho(); ++j)
        for (int k = 0; k < c->n_theta(); ++k) v(j, k) = f(c->x(j, k), c->y(j, k));
    return Field(c, std::move(v));
}

VectorField make_vector_field(const ChartPtr& c, const std::function<Vec2(Real, Real)>& f) {
    Mat vx(c->n_rho(), c->n_theta()), vy(c->n_rho(), c->n_theta());
    for (int j = 0; j < c->n_rho(); ++j)
        for (int k = 0; k < c->n_theta(); ++k) {
            Vec2 val = f(c->x(j, k), c->y(j, k));
            vx(j, k) = val[0];
            vy(j, k) = val[1];
        }
    return VectorField(Field(c, std::move(vx)), Field(c, std::move(vy)));
}

Field zero_field(const ChartPtr& c) {
    return Field(c, Mat::Zero(c->n_rho(), c->n_theta()));
}

Field dx(const Field& f) {
    const DiskChart& c = *f.chart;
    Mat fr = c.radial.D * f.v;
    Mat ft = dtheta_rows(f.v);
    return Field(f.chart, c.drdx.cwiseProduct(fr) + c.dtdx.cwiseProduct(ft));
}

Field dy(const Field& f) {
    const DiskChart& c = *f.chart;
    Mat fr = c.radial.D * f.v;
    Mat ft = dtheta_rows(f.v);
    return Field(f.chart, c.drdy.cwiseProduct(fr) + c.dtdy.cwiseProduct(ft));
}

VectorField gradient(const Field& f) {
    const DiskChart& c = *f.chart;
    Mat fr = c.radial.D * f.v;
    Mat ft = dtheta_rows(f.v);
    return VectorField(Field(f.chart, c.drdx.cwiseProduct(fr) + c.dtdx.cwiseProduct(ft)),
                       Field(f.chart, c.drdy.cwiseProduct(fr) + c.dtdy.cwiseProduct(ft)));
}

Field divergence(const VectorField& u) { return dx(u.x) + dy(u.y); }

Field curl2d(const VectorField& u) { return dx(u.y) - dy(u.x); }

Field laplacian(const Field& f) { return divergence(gradient(f)); }

Field advect(const VectorField& u, const Field& f) {
    return multiply(u.x, dx(f)) + multiply(u.y, dy(f));
}

VectorField advect(const VectorField& u, const VectorField& w) {
    return VectorField(advect(u, w.x), advect(u, w.y));
}

Real integrate(const Field& f) { return f.chart->quad_w.cwiseProduct(f.v).sum(); }

Real inner(const Field& a, const Field& b) {
    require_same_chart(a, b);
    return a.chart->quad_w.cwiseProduct(a.v).cwiseProduct(b.v).sum();
}

Real l2_norm(const Field& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

Real interior_sobolev_norm(const Field& f, int k) {
    if (k < 0 || k > kMaxDerivativeOrder)
        throw OrderTooHigh("sobolev order " + std::to_string(k));
    Real acc = inner(f, f);
    std::vector<Field> cur{f};
    for (int m = 1; m <= k; ++m) {
        std::vector<Field> next;
        next.reserve(m + 1);
        next.push_back(dx(cur[0]));
        for (int i = 1; i <= m; ++i) next.push_back(dy(cur[i - 1]));
        for (const Field& d : next) acc += inner(d, d);
        cur = std::move(next);
    }
    return std::sqrt(acc);
}

Real eval_polar(const Field& f, Real rho, Real theta) {
    Vec c = f.chart->radial.cardinal(rho);
    Vec ray = f.v.transpose() * c;
    return trig_eval(ray, theta);
}

Vec eval_xy(const Field& f, const Mat2X& pts) {
    const DiskChart& c = *f.chart;
    const Real band = c.extrapolation_band();
    Vec out(pts.cols());
    for (Eigen::Index q = 0; q < pts.cols(); ++q) {
        const Real r = std::hypot(pts(0, q), pts(1, q));
        const Real theta = (r < 1e-300) ? 0.0 : std::atan2(pts(1, q), pts(0, q));
        const Real R = 1.0 + trig_eval(c.gamma.eta, theta);
        const Real rho = r / R;
        if (rho > 1.0 + band)
            throw DomainNotContained("evaluation point at rho = " + std::to_string(rho));
        out[q] = eval_polar(f, rho, theta);
    }
    return out;
}

Field restrict_field(const Field& f, const ChartPtr& target) {
    const DiskChart& src = *f.chart;
    const DiskChart& dst = *target;
    const Real band = src.extrapolation_band();
    Mat out(dst.n_rho(), dst.n_theta());

    if (dst.n_theta() == src.n_theta()) {
        // charts share angular rays: pure radial resampling per column
        Vec Rs = src.gamma.radius(), Rt = dst.gamma.radius();
        for (int k = 0; k < dst.n_theta(); ++k) {
            const Real scale = Rt[k] / Rs[k];
            for (int j = 0; j < dst.n_rho(); ++j) {
                const Real rho_src = dst.radial.nodes[j] * scale;
                if (rho_src > 1.0 + band)
                    throw DomainNotContained("target radius exceeds source by " +
                                             std::to_string(rho_src - 1.0));
                out(j, k) = src.radial.cardinal(rho_src).dot(f.v.col(k));
            }
        }
    } else {
        Vec td = dst.gamma.thetas(), Rt = dst.gamma.radius();
        for (int k = 0; k < dst.n_theta(); ++k) {
            const Real Rsrc = 1.0 + trig_eval(src.gamma.eta, td[k]);
            for (int j = 0; j < dst.n_rho(); ++j) {
                const Real rho_src = dst.radial.nodes[j] * Rt[k] / Rsrc;
                if (rho_src > 1.0 + band)
                    throw DomainNotContained("target radius exceeds source by " +
                                             std::to_string(rho_src - 1.0));
                out(j, k) = eval_polar(f, rho_src, td[k]);
            }
        }
    }
    return Field(target, std::move(out));
}

VectorField restrict_vector(const VectorField& u, const ChartPtr& target) {
    return VectorField(restrict_field(u.x, target), restrict_field(u.y, target));
}

BoundaryScalar normal_trace(const VectorField& u) {
    Mat2X n = outward_normal(u.chart()->gamma);
    BoundaryScalar bx = u.x.boundary_trace(), by = u.y.boundary_trace();
    BoundaryScalar out(bx.size());
    for (Eigen::Index k = 0; k < bx.size(); ++k)
        out[k] = bx[k] * n(0, k) + by[k] * n(1, k);
    return out;
}

}  // namespace droplet

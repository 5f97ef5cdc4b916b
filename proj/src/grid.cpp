#include "platelab/grid.hpp"

#include <cmath>
#include <string>

namespace platelab {

Grid2D::Grid2D(double a1, double b1, double a2, double b2, int m1, int m2)
    : x1min(a1), x1max(b1), x2min(a2), x2max(b2), n1(m1), n2(m2) {
    if (n1 < 3 || n2 < 3)
        throw InputError("Grid2D: need at least 3 nodes per axis");
    if (!(x1max > x1min) || !(x2max > x2min))
        throw InputError("Grid2D: empty extent");
}

Field3D::Field3D(const Grid2D& g, int m3) : grid(g), n3(m3) {
    if (n3 < 3) throw InputError("Field3D: need n3 >= 3");
    values = Eigen::MatrixXd::Zero(grid.size() * n3, 3);
}

ScalarField2D VectorField2D::component(int c) const {
    ScalarField2D out(grid);
    out.values = values.col(c);
    return out;
}

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& values, const char* what) {
    if (!values.allFinite())
        throw InputError(std::string(what) + ": non-finite values");
}

Eigen::VectorXd quadrature_weights(int n, double h) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    auto simpson = [&](int first, int last) {
        // last - first even
        w[first] += h / 3.0;
        w[last] += h / 3.0;
        for (int i = first + 1; i < last; ++i)
            w[i] += (i - first) % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
    };
    int intervals = n - 1;
    if (intervals % 2 == 0) {
        simpson(0, n - 1);
    } else if (intervals == 3) {
        w << 3 * h / 8, 9 * h / 8, 9 * h / 8, 3 * h / 8;
    } else {
        simpson(0, n - 4);
        w[n - 4] += 3 * h / 8;
        w[n - 3] += 9 * h / 8;
        w[n - 2] += 9 * h / 8;
        w[n - 1] += 3 * h / 8;
    }
    return w;
}

Eigen::VectorXd quadrature_weights(const Grid2D& g) {
    Eigen::VectorXd w1 = quadrature_weights(g.n1, g.h1());
    Eigen::VectorXd w2 = quadrature_weights(g.n2, g.h2());
    Eigen::VectorXd w(g.size());
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) w[g.idx(i, j)] = w1[i] * w2[j];
    return w;
}

double integrate(const ScalarField2D& f) {
    check_finite(f.values, "integrate");
    return quadrature_weights(f.grid).dot(f.values);
}

namespace {

// One-dimensional first derivative along a strided slice of `in`.
inline void d_line(const double* in, double* out, int n, int stride, double h) {
    const double inv2h = 0.5 / h;
    out[0] = (-3.0 * in[0] + 4.0 * in[stride] - in[2 * stride]) * inv2h;
    for (int i = 1; i < n - 1; ++i)
        out[i * stride] = (in[(i + 1) * stride] - in[(i - 1) * stride]) * inv2h;
    out[(n - 1) * stride] =
        (3.0 * in[(n - 1) * stride] - 4.0 * in[(n - 2) * stride] + in[(n - 3) * stride]) * inv2h;
}

inline void d_line_transpose(const double* in, double* out, int n, int stride, double h) {
    const double inv2h = 0.5 / h;
    for (int i = 0; i < n; ++i) out[i * stride] = 0.0;
    // scatter the stencil of each row of the forward operator
    out[0] += -3.0 * inv2h * in[0];
    out[stride] += 4.0 * inv2h * in[0];
    out[2 * stride] += -inv2h * in[0];
    for (int i = 1; i < n - 1; ++i) {
        out[(i + 1) * stride] += inv2h * in[i * stride];
        out[(i - 1) * stride] += -inv2h * in[i * stride];
    }
    out[(n - 1) * stride] += 3.0 * inv2h * in[(n - 1) * stride];
    out[(n - 2) * stride] += -4.0 * inv2h * in[(n - 1) * stride];
    out[(n - 3) * stride] += inv2h * in[(n - 1) * stride];
}

// First derivative whose one-sided closure has the same leading error term
// +h^2/6 f''' as the central rule.  With a plain one-sided stencil the error
// constant jumps at the boundary and differencing that jump in a second pass
// costs an order; the matched 4-point stencil keeps hessian() second-order
// accurate up to the boundary.  Exact for quadratics.
constexpr double kMatched[4] = {-2.0, 7.0 / 2.0, -2.0, 1.0 / 2.0};

inline void d_line_matched(const double* in, double* out, int n, int stride, double h) {
    if (n < 4) {
        d_line(in, out, n, stride, h);
        return;
    }
    double lo = 0.0, hi = 0.0;
    for (int m = 0; m < 4; ++m) {
        lo += kMatched[m] * in[m * stride];
        hi -= kMatched[m] * in[(n - 1 - m) * stride];
    }
    out[0] = lo / h;
    const double inv2h = 0.5 / h;
    for (int i = 1; i < n - 1; ++i)
        out[i * stride] = (in[(i + 1) * stride] - in[(i - 1) * stride]) * inv2h;
    out[(n - 1) * stride] = hi / h;
}

inline void d_line_matched_transpose(const double* in, double* out, int n, int stride, double h) {
    if (n < 4) {
        d_line_transpose(in, out, n, stride, h);
        return;
    }
    for (int i = 0; i < n; ++i) out[i * stride] = 0.0;
    for (int m = 0; m < 4; ++m) {
        out[m * stride] += kMatched[m] / h * in[0];
        out[(n - 1 - m) * stride] += -kMatched[m] / h * in[(n - 1) * stride];
    }
    const double inv2h = 0.5 / h;
    for (int i = 1; i < n - 1; ++i) {
        out[(i + 1) * stride] += inv2h * in[i * stride];
        out[(i - 1) * stride] += -inv2h * in[i * stride];
    }
}

}  // namespace

void apply_d1(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int j = 0; j < g.n2; ++j)
        d_line(in.data() + g.idx(0, j), out.data() + g.idx(0, j), g.n1, 1, g.h1());
}

void apply_d2(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int i = 0; i < g.n1; ++i)
        d_line(in.data() + i, out.data() + i, g.n2, g.n1, g.h2());
}

void apply_d1_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int j = 0; j < g.n2; ++j)
        d_line_transpose(in.data() + g.idx(0, j), out.data() + g.idx(0, j), g.n1, 1, g.h1());
}

void apply_d2_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int i = 0; i < g.n1; ++i)
        d_line_transpose(in.data() + i, out.data() + i, g.n2, g.n1, g.h2());
}

void apply_dh1(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int j = 0; j < g.n2; ++j)
        d_line_matched(in.data() + g.idx(0, j), out.data() + g.idx(0, j), g.n1, 1, g.h1());
}

void apply_dh2(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int i = 0; i < g.n1; ++i)
        d_line_matched(in.data() + i, out.data() + i, g.n2, g.n1, g.h2());
}

void apply_dh1_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int j = 0; j < g.n2; ++j)
        d_line_matched_transpose(in.data() + g.idx(0, j), out.data() + g.idx(0, j), g.n1, 1, g.h1());
}

void apply_dh2_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(g.size());
    for (int i = 0; i < g.n1; ++i)
        d_line_matched_transpose(in.data() + i, out.data() + i, g.n2, g.n1, g.h2());
}

VectorField2D gradient(const ScalarField2D& f) {
    check_finite(f.values, "gradient");
    VectorField2D g(f.grid, 2);
    Eigen::VectorXd tmp;
    apply_d1(f.grid, f.values, tmp);
    g.values.col(0) = tmp;
    apply_d2(f.grid, f.values, tmp);
    g.values.col(1) = tmp;
    return g;
}

SymMatrixField2D hessian(const ScalarField2D& f) {
    check_finite(f.values, "hessian");
    SymMatrixField2D h;
    h.grid = f.grid;
    Eigen::VectorXd w1, w2;
    apply_dh1(f.grid, f.values, w1);
    apply_dh2(f.grid, f.values, w2);
    // gradient-of-gradient: the mixed entries agree exactly because the two
    // 1D operators commute, so the output is symmetric by construction
    apply_dh1(f.grid, w1, h.h11);
    apply_dh2(f.grid, w1, h.h12);
    apply_dh2(f.grid, w2, h.h22);
    return h;
}

double curl_residual(const VectorField2D& g) {
    Eigen::VectorXd c1, c2;
    apply_d1(g.grid, g.values.col(1), c1);
    apply_d2(g.grid, g.values.col(0), c2);
    ScalarField2D r(g.grid);
    r.values = (c1 - c2).cwiseAbs();
    return integrate(r);
}

namespace {

// Cumulative line integral, third-order accurate: each interval is
// integrated with the quadratic through its two endpoints and one neighbour.
void cumulative_integral(const double* f, double* F, int n, int stride, double h) {
    F[0] = 0.0;
    for (int i = 0; i + 2 < n; ++i)
        F[(i + 1) * stride] =
            F[i * stride] +
            h * (5.0 * f[i * stride] + 8.0 * f[(i + 1) * stride] - f[(i + 2) * stride]) / 12.0;
    F[(n - 1) * stride] =
        F[(n - 2) * stride] +
        h * (-f[(n - 3) * stride] + 8.0 * f[(n - 2) * stride] + 5.0 * f[(n - 1) * stride]) / 12.0;
}

}  // namespace

ScalarField2D integrate_potential(const VectorField2D& g, double tau_curl) {
    if (g.dim() != 2) throw InputError("integrate_potential: expected a 2-vector field");
    check_finite(g.values, "integrate_potential");
    const Grid2D& gr = g.grid;
    double sup = g.values.cwiseAbs().maxCoeff();
    if (tau_curl < 0) tau_curl = 1e-6 * sup * gr.area();
    double res = curl_residual(g);
    if (res > tau_curl && sup > 0)
        throw NonIntegrableFieldError(
            "integrate_potential: curl residual " + std::to_string(res) +
                " exceeds tolerance " + std::to_string(tau_curl),
            res);

    const int n1 = gr.n1, n2 = gr.n2;
    Eigen::VectorXd cum1(gr.size()), cum2(gr.size());
    for (int j = 0; j < n2; ++j) {
        Eigen::VectorXd line = g.values.col(0).segment(gr.idx(0, j), n1);
        cumulative_integral(line.data(), cum1.data() + gr.idx(0, j), n1, 1, gr.h1());
    }
    for (int i = 0; i < n1; ++i)
        cumulative_integral(g.values.col(1).data() + i, cum2.data() + i, n2, n1, gr.h2());

    // average the two staircase path orders from the lower-left corner
    ScalarField2D theta(gr);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            double a = cum1[gr.idx(i, 0)] + cum2[gr.idx(i, j)];
            double b = cum2[gr.idx(0, j)] + cum1[gr.idx(i, j)];
            theta.values[gr.idx(i, j)] = 0.5 * (a + b);
        }
    theta.values.array() -= integrate(theta) / gr.area();
    return theta;
}

ScalarField2D sample(const Grid2D& g, const std::function<double(double, double)>& f) {
    ScalarField2D out(g);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) out.values[g.idx(i, j)] = f(g.x1(i), g.x2(j));
    return out;
}

VectorField2D sample_vector(const Grid2D& g, int d,
                            const std::function<Eigen::VectorXd(double, double)>& f) {
    VectorField2D out(g, d);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i)
            out.values.row(g.idx(i, j)) = f(g.x1(i), g.x2(j)).transpose();
    return out;
}

}  // namespace platelab

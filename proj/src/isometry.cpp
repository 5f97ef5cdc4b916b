#include "platelab/isometry.hpp"

#include <cmath>

namespace platelab {

double developability_residual(const ScalarField2D& v) {
    SymMatrixField2D h = hessian(v);
    ScalarField2D det(v.grid);
    det.values = (h.h11.array() * h.h22.array() - h.h12.array().square()).abs();
    return integrate(det);
}

double developability_tolerance(const ScalarField2D& v) {
    SymMatrixField2D h = hessian(v);
    ScalarField2D l1(v.grid);
    l1.values = h.h11.cwiseAbs() + 2.0 * h.h12.cwiseAbs() + h.h22.cwiseAbs();
    return 1e-6 * integrate(l1);
}

ScalarField2D sigmoid_ridge(const Grid2D& g, const Eigen::Vector2d& y, double theta) {
    return sample(g, [&](double x1, double x2) {
        return 1.0 / (1.0 + std::exp(-(y[0] * x1 + y[1] * x2 + theta)));
    });
}

namespace {

// forward map u -> sym(grad u) stacked as (s11, s22, s12)
void sym_grad(const Grid2D& g, const Eigen::MatrixXd& u, Eigen::MatrixXd& s) {
    Eigen::VectorXd d1u1, d2u1, d1u2, d2u2;
    apply_d1(g, u.col(0), d1u1);
    apply_d2(g, u.col(0), d2u1);
    apply_d1(g, u.col(1), d1u2);
    apply_d2(g, u.col(1), d2u2);
    s.resize(g.size(), 3);
    s.col(0) = d1u1;
    s.col(1) = d2u2;
    s.col(2) = 0.5 * (d2u1 + d1u2);
}

// adjoint of sym_grad with the quadrature weights (w, w, 2w) baked in
void sym_grad_adjoint(const Grid2D& g, const Eigen::VectorXd& w, const Eigen::MatrixXd& r,
                      Eigen::MatrixXd& out) {
    Eigen::VectorXd t1, t2;
    out.resize(g.size(), 2);
    apply_d1_transpose(g, (w.array() * r.col(0).array()).matrix(), t1);
    apply_d2_transpose(g, (w.array() * r.col(2).array()).matrix(), t2);
    out.col(0) = t1 + t2;
    apply_d2_transpose(g, (w.array() * r.col(1).array()).matrix(), t1);
    apply_d1_transpose(g, (w.array() * r.col(2).array()).matrix(), t2);
    out.col(1) = t1 + t2;
}

void gauge_fix(const Grid2D& g, Eigen::MatrixXd& u) {
    Eigen::VectorXd w = quadrature_weights(g);
    const double area = g.area();
    // remove the infinitesimal rotation (mean skew part of grad u)
    Eigen::VectorXd d2u1, d1u2;
    apply_d2(g, u.col(0), d2u1);
    apply_d1(g, u.col(1), d1u2);
    double omega = 0.5 * w.dot(Eigen::VectorXd(d1u2 - d2u1)) / area;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            int n = g.idx(i, j);
            u(n, 0) += omega * g.x2(j);
            u(n, 1) -= omega * g.x1(i);
        }
    // remove the translation
    for (int c = 0; c < 2; ++c) u.col(c).array() -= w.dot(u.col(c)) / area;
}

}  // namespace

LinearizedSolve solve_u_linearized_full(const ScalarField2D& v, double tau_dev) {
    const Grid2D& g = v.grid;
    double dev = developability_residual(v);
    if (tau_dev < 0) tau_dev = developability_tolerance(v);
    if (dev > tau_dev + 1e-14)
        throw NotDevelopableError("solve_u_linearized: input profile is not developable", dev);

    VectorField2D gv = gradient(v);
    Eigen::MatrixXd p(g.size(), 3);  // 1/2 grad v (x) grad v, stacked like sym_grad
    p.col(0) = 0.5 * gv.values.col(0).cwiseAbs2();
    p.col(1) = 0.5 * gv.values.col(1).cwiseAbs2();
    p.col(2) = 0.5 * (gv.values.col(0).array() * gv.values.col(1).array()).matrix();

    Eigen::VectorXd w = quadrature_weights(g);
    auto wdot = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return w.dot((a.col(0).array() * b.col(0).array() + a.col(1).array() * b.col(1).array() +
                      2.0 * a.col(2).array() * b.col(2).array())
                         .matrix());
    };

    // normal equations K x = b with K = A^T W A, b = -A^T W p
    auto apply_K = [&](const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
        Eigen::MatrixXd s;
        sym_grad(g, x, s);
        sym_grad_adjoint(g, w, s, out);
    };
    Eigen::MatrixXd b;
    sym_grad_adjoint(g, w, p, b);
    b = -b;

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(g.size(), 2);
    Eigen::MatrixXd r = b, z, Ap;
    double rr = r.squaredNorm();
    const double rr0 = rr;
    const int cap = 10 * g.size();
    Eigen::MatrixXd pdir = r;
    int it = 0;
    for (; it < cap && rr > 1e-20 * std::max(1.0, rr0); ++it) {
        if (std::sqrt(rr / std::max(rr0, 1e-300)) <= 1e-10) break;
        apply_K(pdir, Ap);
        double pAp = (pdir.array() * Ap.array()).sum();
        if (pAp <= 0) break;
        double alpha = rr / pAp;
        x += alpha * pdir;
        r -= alpha * Ap;
        double rr_new = r.squaredNorm();
        pdir = r + (rr_new / rr) * pdir;
        rr = rr_new;
    }

    gauge_fix(g, x);

    LinearizedSolve out;
    out.u = VectorField2D(g, 2);
    out.u.values = x;
    out.iterations = it;
    Eigen::MatrixXd s;
    sym_grad(g, x, s);
    Eigen::MatrixXd res = s + p;
    out.residual = std::sqrt(std::max(0.0, wdot(res, res)));
    return out;
}

VectorField2D solve_u_linearized(const ScalarField2D& v, double tau_dev) {
    return solve_u_linearized_full(v, tau_dev).u;
}

VectorField2D normal_field(const VectorField2D& y) {
    if (y.dim() != 3) throw InputError("normal_field: expected a 3-vector field");
    const Grid2D& g = y.grid;
    Eigen::MatrixXd t1(g.size(), 3), t2(g.size(), 3);
    Eigen::VectorXd tmp;
    for (int c = 0; c < 3; ++c) {
        apply_d1(g, y.values.col(c), tmp);
        t1.col(c) = tmp;
        apply_d2(g, y.values.col(c), tmp);
        t2.col(c) = tmp;
    }
    VectorField2D nu(g, 3);
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Vector3d a = t1.row(n), b = t2.row(n);
        nu.values.row(n) = a.cross(b).transpose();
    }
    return nu;
}

IsometricEmbedding isometric_embedding(const ScalarField2D& v) {
    const Grid2D& g = v.grid;
    VectorField2D gv = gradient(v);
    double gsup = gv.values.rowwise().norm().maxCoeff();
    if (gsup > 0.5 + 1e-12)
        throw InputError("isometric_embedding: |grad v| exceeds 1/2");
    double dev = developability_residual(v);
    double tau_dev = developability_tolerance(v);
    if (dev > tau_dev + 1e-14)
        throw NotDevelopableError("isometric_embedding: profile not developable", dev);

    // F = sqrt(Id - grad v (x) grad v) via the closed-form 2x2 square root
    Eigen::MatrixXd F(g.size(), 4);  // (F11, F12, F21, F22); symmetric here
    Eigen::VectorXd detF(g.size());
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Vector2d gr = gv.values.row(n);
        Eigen::Matrix2d M = Eigen::Matrix2d::Identity() - gr * gr.transpose();
        double d = std::sqrt(std::max(0.0, M.determinant()));
        Eigen::Matrix2d Fn = (M + d * Eigen::Matrix2d::Identity()) /
                             std::sqrt(M.trace() + 2.0 * d);
        F.row(n) << Fn(0, 0), Fn(0, 1), Fn(1, 0), Fn(1, 1);
        detF[n] = d;
    }

    // h_F = (1/det F) F^T curl F with per-row curls (curl F)_i = d1 F_i2 - d2 F_i1
    Eigen::VectorXd d1F12, d2F11, d1F22, d2F21;
    apply_d1(g, F.col(1), d1F12);
    apply_d2(g, F.col(0), d2F11);
    apply_d1(g, F.col(3), d1F22);
    apply_d2(g, F.col(2), d2F21);
    VectorField2D hF(g, 2);
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Matrix2d Fn;
        Fn << F(n, 0), F(n, 1), F(n, 2), F(n, 3);
        Eigen::Vector2d curl(d1F12[n] - d2F11[n], d1F22[n] - d2F21[n]);
        hF.values.row(n) = (Fn.transpose() * curl / detF[n]).transpose();
    }

    // zero-mean rotation potential; allow the O(h^2) discrete-curl floor of
    // smooth non-polynomial data on top of the standard tolerance
    double h2 = std::max(g.h1(), g.h2());
    h2 *= h2;
    auto tau_for = [&](const VectorField2D& field) {
        double sup = field.values.cwiseAbs().maxCoeff();
        return std::max(1e-6, 40.0 * h2) * std::max(sup, 1.0) * g.area();
    };
    ScalarField2D theta = integrate_potential(hF, tau_for(hF));

    // grad phi = rotation(theta) * F, integrated per component
    VectorField2D row1(g, 2), row2(g, 2);
    for (int n = 0; n < g.size(); ++n) {
        double ct = std::cos(theta.values[n]), st = std::sin(theta.values[n]);
        Eigen::Matrix2d Rot;
        Rot << ct, -st, st, ct;
        Eigen::Matrix2d Fn;
        Fn << F(n, 0), F(n, 1), F(n, 2), F(n, 3);
        Eigen::Matrix2d G = Rot * Fn;
        row1.values.row(n) = G.row(0);
        row2.values.row(n) = G.row(1);
    }
    ScalarField2D phi1 = integrate_potential(row1, tau_for(row1));
    ScalarField2D phi2 = integrate_potential(row2, tau_for(row2));

    IsometricEmbedding out;
    out.v = v;
    out.grad_sup = gsup;
    out.u = VectorField2D(g, 2);
    ScalarField2D x1c = sample(g, [](double x1, double) { return x1; });
    ScalarField2D x2c = sample(g, [](double, double x2) { return x2; });
    x1c.values.array() -= integrate(x1c) / g.area();
    x2c.values.array() -= integrate(x2c) / g.area();
    out.u.values.col(0) = phi1.values - x1c.values;
    out.u.values.col(1) = phi2.values - x2c.values;
    out.u_sup = out.u.values.rowwise().norm().maxCoeff();

    out.y = VectorField2D(g, 3);
    for (int n = 0; n < g.size(); ++n) {
        int i = n % g.n1, j = n / g.n1;
        out.y.values(n, 0) = g.x1(i) + out.u.values(n, 0);
        out.y.values(n, 1) = g.x2(j) + out.u.values(n, 1);
        out.y.values(n, 2) = v.values[n];
    }

    out.residual = isometry_residual(out.y);

    SymMatrixField2D hv = hessian(v);
    double hsup = 0.0;
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Matrix2d H;
        H << hv.h11[n], hv.h12[n], hv.h12[n], hv.h22[n];
        hsup = std::max(hsup, H.cwiseAbs().maxCoeff());
    }
    out.estimate_bound = hsup * gsup + gsup * gsup;
    return out;
}

double isometry_residual(const VectorField2D& y) {
    if (y.dim() != 3) throw InputError("isometry_residual: expected a d = 3 field");
    const Grid2D& g = y.grid;
    Eigen::MatrixXd t1(g.size(), 3), t2(g.size(), 3);
    Eigen::VectorXd tmp;
    for (int c = 0; c < 3; ++c) {
        apply_d1(g, y.values.col(c), tmp);
        t1.col(c) = tmp;
        apply_d2(g, y.values.col(c), tmp);
        t2.col(c) = tmp;
    }
    double res = 0.0;
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Vector3d a = t1.row(n), b = t2.row(n);
        res = std::max(res, std::abs(a.dot(a) - 1.0));
        res = std::max(res, std::abs(b.dot(b) - 1.0));
        res = std::max(res, std::abs(a.dot(b)));
    }
    return res;
}

}  // namespace platelab

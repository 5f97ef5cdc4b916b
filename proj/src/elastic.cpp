#include "platelab/elastic.hpp"

#include <cmath>

namespace platelab {

ElasticModel::ElasticModel(double l, double m) : lambda(l), mu(m) {
    if (!(mu > 0) || !(lambda >= 0))
        throw InputError("ElasticModel: need mu > 0 and lambda >= 0");
}

double ElasticModel::quadratic_form(const Eigen::Matrix3d& A) const {
    Eigen::Matrix3d S = 0.5 * (A + A.transpose());
    return lambda * A.trace() * A.trace() + 2.0 * mu * S.squaredNorm();
}

namespace {

// dQ(M) : X for the form above
Eigen::Matrix3d q_differential(double lambda, double mu, const Eigen::Matrix3d& M) {
    return 2.0 * lambda * M.trace() * Eigen::Matrix3d::Identity() +
           4.0 * mu * 0.5 * (M + M.transpose());
}

Eigen::Matrix3d embed_plane(const Eigen::Matrix2d& A) {
    Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
    B.topLeftCorner<2, 2>() = A;
    return B;
}

// minimizing transverse vector a of Q(A + a (x) e3 + e3 (x) a)
Eigen::Vector3d relaxing_vector(double lambda, double mu, const Eigen::Matrix3d& A0) {
    Eigen::Matrix3d E[3];
    for (int i = 0; i < 3; ++i) {
        E[i].setZero();
        E[i](i, 2) += 1.0;
        E[i](2, i) += 1.0;
    }
    Eigen::Matrix3d H;
    Eigen::Vector3d r;
    Eigen::Matrix3d dq = q_differential(lambda, mu, A0);
    for (int i = 0; i < 3; ++i) {
        r[i] = dq.cwiseProduct(E[i]).sum();
        for (int j = 0; j < 3; ++j)
            H(i, j) = 2.0 * lambda * E[i].trace() * E[j].trace() +
                      4.0 * mu * E[i].cwiseProduct(E[j]).sum();
    }
    return H.ldlt().solve(-r);
}

}  // namespace

double ElasticModel::q_reduced(const Eigen::Matrix2d& A) const {
    Eigen::Matrix3d A0 = embed_plane(A);
    Eigen::Vector3d a = relaxing_vector(lambda, mu, A0);
    Eigen::Matrix3d B = A0;
    B.col(2) += a;
    B.row(2) += a.transpose();
    return quadratic_form(B);
}

Eigen::Matrix2d ElasticModel::q_reduced_gradient(const Eigen::Matrix2d& A) const {
    Eigen::Matrix3d A0 = embed_plane(A);
    Eigen::Vector3d a = relaxing_vector(lambda, mu, A0);
    Eigen::Matrix3d B = A0;
    B.col(2) += a;
    B.row(2) += a.transpose();
    // envelope identity: the minimizing a is stationary, so only the direct
    // dependence on A survives
    return q_differential(lambda, mu, B).topLeftCorner<2, 2>();
}

double ElasticModel::stored_density(const Eigen::Matrix3d& F) const {
    Eigen::Matrix3d E = 0.5 * (F.transpose() * F - Eigen::Matrix3d::Identity());
    return 0.5 * lambda * E.trace() * E.trace() + mu * E.squaredNorm();
}

namespace {

struct PlanarDerivatives {
    Eigen::MatrixXd d1, d2;  // size x d
};

PlanarDerivatives planar_derivatives(const Grid2D& g, const Eigen::MatrixXd& vals) {
    PlanarDerivatives out;
    out.d1.resize(vals.rows(), vals.cols());
    out.d2.resize(vals.rows(), vals.cols());
    Eigen::VectorXd tmp;
    for (int c = 0; c < vals.cols(); ++c) {
        apply_d1(g, vals.col(c), tmp);
        out.d1.col(c) = tmp;
        apply_d2(g, vals.col(c), tmp);
        out.d2.col(c) = tmp;
    }
    return out;
}

}  // namespace

EnergySplit energy_vk(const VectorField2D& u, const ScalarField2D& v,
                      const ElasticModel& m) {
    const Grid2D& g = v.grid;
    if (u.grid != g) throw InputError("energy_vk: fields on different grids");
    if (u.dim() != 2) throw InputError("energy_vk: u must have d = 2");
    check_finite(u.values, "energy_vk u");
    check_finite(v.values, "energy_vk v");

    PlanarDerivatives du = planar_derivatives(g, u.values);
    VectorField2D gv = gradient(v);
    SymMatrixField2D hv = hessian(v);
    Eigen::VectorXd w = quadrature_weights(g);

    EnergySplit out;
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Vector2d gr(gv.values(n, 0), gv.values(n, 1));
        Eigen::Matrix2d A;
        A(0, 0) = 2.0 * du.d1(n, 0) + gr[0] * gr[0];
        A(1, 1) = 2.0 * du.d2(n, 1) + gr[1] * gr[1];
        A(0, 1) = A(1, 0) = du.d1(n, 1) + du.d2(n, 0) + gr[0] * gr[1];
        Eigen::Matrix2d H;
        H << hv.h11[n], hv.h12[n], hv.h12[n], hv.h22[n];
        out.membrane += w[n] * m.q_reduced(A) / 8.0;
        out.bending += w[n] * m.q_reduced(H) / 24.0;
    }
    out.total = out.membrane + out.bending;
    return out;
}

void energy_vk_gradient(const VectorField2D& u, const ScalarField2D& v,
                        const ElasticModel& m, Eigen::MatrixXd& grad_u,
                        Eigen::VectorXd& grad_v) {
    const Grid2D& g = v.grid;
    if (u.grid != g || u.dim() != 2)
        throw InputError("energy_vk_gradient: fields on different grids");

    PlanarDerivatives du = planar_derivatives(g, u.values);
    VectorField2D gv = gradient(v);
    SymMatrixField2D hv = hessian(v);
    Eigen::VectorXd w = quadrature_weights(g);

    const int N = g.size();
    // weighted membrane differential G = w * dq(A) and its action on grad v
    Eigen::VectorXd G11(N), G12(N), G22(N), P1(N), P2(N);
    Eigen::VectorXd B11(N), B12(N), B22(N);
    for (int n = 0; n < N; ++n) {
        Eigen::Vector2d gr(gv.values(n, 0), gv.values(n, 1));
        Eigen::Matrix2d A;
        A(0, 0) = 2.0 * du.d1(n, 0) + gr[0] * gr[0];
        A(1, 1) = 2.0 * du.d2(n, 1) + gr[1] * gr[1];
        A(0, 1) = A(1, 0) = du.d1(n, 1) + du.d2(n, 0) + gr[0] * gr[1];
        Eigen::Matrix2d G = (w[n] / 8.0) * m.q_reduced_gradient(A);
        G11[n] = G(0, 0);
        G22[n] = G(1, 1);
        G12[n] = 0.5 * (G(0, 1) + G(1, 0));
        Eigen::Vector2d p = Eigen::Matrix2d({{G11[n], G12[n]}, {G12[n], G22[n]}}) * gr;
        P1[n] = p[0];
        P2[n] = p[1];
        Eigen::Matrix2d H;
        H << hv.h11[n], hv.h12[n], hv.h12[n], hv.h22[n];
        Eigen::Matrix2d Gb = (w[n] / 24.0) * m.q_reduced_gradient(H);
        B11[n] = Gb(0, 0);
        B22[n] = Gb(1, 1);
        B12[n] = 0.5 * (Gb(0, 1) + Gb(1, 0));
    }

    grad_u.setZero(N, 2);
    grad_v.setZero(N);
    Eigen::VectorXd t1, t2;
    // membrane, u: dE = 2 G : sym grad(delta u) = 2 G_{ab} d_a delta u_b
    apply_d1_transpose(g, G11, t1);
    apply_d2_transpose(g, G12, t2);
    grad_u.col(0) += 2.0 * (t1 + t2);
    apply_d1_transpose(g, G12, t1);
    apply_d2_transpose(g, G22, t2);
    grad_u.col(1) += 2.0 * (t1 + t2);
    // membrane, v: dE = 2 (G grad v) . grad delta v
    apply_d1_transpose(g, P1, t1);
    apply_d2_transpose(g, P2, t2);
    grad_v += 2.0 * (t1 + t2);
    // bending: dE = Gb : hess delta v with the matched-stencil operators
    apply_dh1_transpose(g, B11, t1);
    apply_dh1_transpose(g, t1, t2);
    grad_v += t2;
    apply_dh2_transpose(g, B22, t1);
    apply_dh2_transpose(g, t1, t2);
    grad_v += t2;
    apply_dh1_transpose(g, B12, t1);
    apply_dh2_transpose(g, t1, t2);
    grad_v += 2.0 * t2;
}

double energy_kl(const VectorField2D& y, const ElasticModel& m, double tau_iso) {
    if (y.dim() != 3) throw InputError("energy_kl: y must have d = 3");
    double res = isometry_residual(y);
    if (res > tau_iso) throw NotAnIsometryError("energy_kl", res);

    const Grid2D& g = y.grid;
    VectorField2D nu = normal_field(y);
    PlanarDerivatives dy = planar_derivatives(g, y.values);
    PlanarDerivatives dn = planar_derivatives(g, nu.values);
    Eigen::VectorXd w = quadrature_weights(g);
    double val = 0.0;
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Matrix2d II;  // grad y^T grad nu
        II(0, 0) = dy.d1.row(n).dot(dn.d1.row(n));
        II(0, 1) = dy.d1.row(n).dot(dn.d2.row(n));
        II(1, 0) = dy.d2.row(n).dot(dn.d1.row(n));
        II(1, 1) = dy.d2.row(n).dot(dn.d2.row(n));
        val += w[n] * m.q_reduced(II) / 24.0;
    }
    return val;
}

void check_admissible(const AdmissibleQuadruplet& q, const OptimalRotationSet& set) {
    check_rotation(q.R);
    double gap = set.max_value - evaluate_F(set.mm, q.R);
    if (gap > 1e-7 * std::max(1.0, set.mm.M.norm()))
        throw InputError("check_admissible: rotation not in the optimal set");
    double scale = std::max(1.0, q.W.frobenius_norm());
    for (const SkewMatrix& t : tangent_space(set, q.R)) {
        // Frobenius inner product of skews is twice the coordinate product
        double comp = 2.0 * q.W.coords().dot(t.coords());
        if (std::abs(comp) > 1e-8 * scale)
            throw InputError("check_admissible: W has a tangent component");
    }
}

TotalVK total_vk(const AdmissibleQuadruplet& q, const Load& load,
                 const ElasticModel& m, const OptimalRotationSet& set) {
    const Grid2D& g = q.v.grid;
    if (load.f.grid != g) throw InputError("total_vk: load grid mismatch");
    check_admissible(q, set);

    TotalVK out;
    out.elastic = energy_vk(q.u, q.v, m);
    Eigen::VectorXd w = quadrature_weights(g);
    Eigen::Matrix3d Wm = q.W.matrix();
    Eigen::Vector3d rwe3 = q.R * Wm * Eigen::Vector3d::UnitZ();
    Eigen::Matrix3d rw2 = q.R * Wm * Wm;
    for (int n = 0; n < g.size(); ++n) {
        int i = n % g.n1, j = n / g.n1;
        Eigen::Vector3d f = load.f.values.row(n);
        Eigen::Vector3d uu(q.u.values(n, 0), q.u.values(n, 1), 0.0);
        Eigen::Vector3d xp(g.x1(i), g.x2(j), 0.0);
        out.load_u += w[n] * f.dot(q.R * uu);
        out.load_v += w[n] * f.dot(rwe3) * q.v.values[n];
        out.load_w2 += w[n] * f.dot(rw2 * xp);
    }
    out.value = out.elastic.total - out.load_u - out.load_v - out.load_w2;
    return out;
}

TotalVK total_vk(const AdmissibleQuadruplet& q, const Load& load,
                 const ElasticModel& m) {
    return total_vk(q, load, m, classify_optimal_set(load, moment_matrix(load)));
}

TotalKL total_kl(const VectorField2D& y, const Load& load, const ElasticModel& m,
                 double tau_iso) {
    if (load.f.grid != y.grid) throw InputError("total_kl: load grid mismatch");
    TotalKL out;
    out.elastic = energy_kl(y, m, tau_iso);
    Eigen::VectorXd w = quadrature_weights(y.grid);
    out.load = (w.asDiagonal() * load.f.values).cwiseProduct(y.values).sum();
    out.value = out.elastic - out.load;
    return out;
}

namespace {

// transverse derivative of a stacked field, slab by slab
Eigen::MatrixXd d3_stacked(const Field3D& y) {
    const int N = y.grid.size(), n3 = y.n3;
    const double h3 = y.h3();
    Eigen::MatrixXd out(N * n3, 3);
    auto slab = [&](int k) { return y.values.middleRows(N * k, N); };
    for (int k = 0; k < n3; ++k) {
        if (k == 0)
            out.middleRows(0, N) = (-3.0 * slab(0) + 4.0 * slab(1) - slab(2)) / (2 * h3);
        else if (k == n3 - 1)
            out.middleRows(N * k, N) =
                (3.0 * slab(k) - 4.0 * slab(k - 1) + slab(k - 2)) / (2 * h3);
        else
            out.middleRows(N * k, N) = (slab(k + 1) - slab(k - 1)) / (2 * h3);
    }
    return out;
}

}  // namespace

double energy_h3d(const Field3D& y, double h, const ElasticModel& m) {
    if (!(h > 0)) throw InputError("energy_h3d: h must be positive");
    if (y.n3 < 4) throw InputError("energy_h3d: need at least 4 transverse nodes");
    check_finite(y.values, "energy_h3d y");
    const Grid2D& g = y.grid;
    const int N = g.size();

    Eigen::MatrixXd d3 = d3_stacked(y);
    Eigen::VectorXd w2 = quadrature_weights(g);
    Eigen::VectorXd w3 = quadrature_weights(y.n3, y.h3());
    double val = 0.0;
    Eigen::VectorXd tmp;
    for (int k = 0; k < y.n3; ++k) {
        Eigen::MatrixXd slab = y.values.middleRows(N * k, N);
        PlanarDerivatives d = planar_derivatives(g, slab);
        for (int n = 0; n < N; ++n) {
            Eigen::Matrix3d F;
            F.col(0) = d.d1.row(n);
            F.col(1) = d.d2.row(n);
            F.col(2) = d3.row(N * k + n) / h;
            val += w2[n] * w3[k] * m.stored_density(F);
        }
    }
    return val;
}

double total_h3d(const Field3D& y, double h, const Load& load, const ElasticModel& m) {
    if (load.f.grid != y.grid) throw InputError("total_h3d: load grid mismatch");
    const int N = y.grid.size();
    Eigen::VectorXd w2 = quadrature_weights(y.grid);
    Eigen::VectorXd w3 = quadrature_weights(y.n3, y.h3());
    double work = 0.0;
    for (int k = 0; k < y.n3; ++k)
        work += w3[k] * (w2.asDiagonal() * load.f.values)
                            .cwiseProduct(y.values.middleRows(N * k, N))
                            .sum();
    return energy_h3d(y, h, m) - h * h * work;
}

Field3D test_deformation_vk(const Eigen::Matrix3d& R, const ScalarField2D& v,
                            double h, int n3) {
    check_rotation(R);
    check_finite(v.values, "test_deformation_vk v");
    const Grid2D& g = v.grid;
    VectorField2D gv = gradient(v);
    Field3D y(g, n3);
    for (int k = 0; k < n3; ++k) {
        double x3 = y.x3(k);
        for (int n = 0; n < g.size(); ++n) {
            int i = n % g.n1, j = n / g.n1;
            Eigen::Vector3d p(g.x1(i) - h * h * x3 * gv.values(n, 0),
                              g.x2(j) - h * h * x3 * gv.values(n, 1),
                              h * x3 + h * v.values[n]);
            y.values.row(y.row(i, j, k)) = (R * p).transpose();
        }
    }
    return y;
}

Field3D test_deformation_kl(const Eigen::Matrix3d& R, const VectorField2D& y2d,
                            double h, int n3, double tau_iso) {
    check_rotation(R);
    if (y2d.dim() != 3) throw InputError("test_deformation_kl: y2d must have d = 3");
    double res = isometry_residual(y2d);
    if (res > tau_iso) throw NotAnIsometryError("test_deformation_kl", res);
    const Grid2D& g = y2d.grid;
    VectorField2D nu = normal_field(y2d);
    Field3D y(g, n3);
    for (int k = 0; k < n3; ++k) {
        double x3 = y.x3(k);
        for (int n = 0; n < g.size(); ++n) {
            Eigen::Vector3d p =
                Eigen::Vector3d(y2d.values.row(n)) + h * x3 * Eigen::Vector3d(nu.values.row(n));
            y.values.row(n + g.size() * k) = (R * p).transpose();
        }
    }
    return y;
}

ScalingStudy scaling_study(const std::function<double(double, int)>& energy,
                           const std::vector<double>& h_values, int n_start,
                           int n_max) {
    if (h_values.size() < 4)
        throw InputError("scaling_study: need at least 4 thickness samples");
    for (size_t i = 1; i < h_values.size(); ++i)
        if (!(h_values[i] < h_values[i - 1]) || !(h_values[i] > 0))
            throw InputError("scaling_study: h values must be positive decreasing");
    if (h_values.front() / h_values.back() < 10.0 * (1.0 - 1e-12))
        throw InputError("scaling_study: h values must span at least a decade");

    ScalingStudy out;
    out.h_values = h_values;
    std::vector<double> prev;
    for (int n = n_start;; n = 2 * n - 1) {
        std::vector<double> cur;
        for (double h : h_values) cur.push_back(energy(h, n));
        double emin = 1e300;
        for (double e : cur) emin = std::min(emin, std::abs(e));
        if (emin < 1e-14)
            throw DegenerateFitError(
                "scaling_study: energies indistinguishable from zero");
        bool converged = false;
        if (!prev.empty()) {
            double drift = 0.0;
            for (size_t i = 0; i < cur.size(); ++i)
                drift = std::max(drift, std::abs(cur[i] - prev[i]));
            converged = drift < 0.1 * emin;
        }
        if (converged || n >= n_max) {
            out.energies = cur;
            out.grid_n = n;
            break;
        }
        prev = cur;
    }

    for (double e : out.energies)
        if (!(e > 0))
            throw DegenerateFitError("scaling_study: nonpositive energy sample");
    const int K = static_cast<int>(h_values.size());
    Eigen::MatrixXd X(K, 2);
    Eigen::VectorXd Y(K);
    for (int i = 0; i < K; ++i) {
        X(i, 0) = std::log(h_values[i]);
        X(i, 1) = 1.0;
        Y[i] = std::log(out.energies[i]);
    }
    Eigen::Vector2d beta = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
    out.slope = beta[0];
    out.intercept = beta[1];
    out.residual = std::sqrt((X * beta - Y).squaredNorm() / K);
    return out;
}

}  // namespace platelab

#include "platelab/load.hpp"

namespace platelab {

double Load::l2_norm() const {
    Eigen::VectorXd w = quadrature_weights(f.grid);
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += w.dot(f.values.col(c).cwiseAbs2());
    return std::sqrt(s);
}

Load normalize_mean(const VectorField2D& f) {
    if (f.dim() != 3) throw InputError("normalize_mean: load must have 3 components");
    check_finite(f.values, "normalize_mean");
    Eigen::VectorXd w = quadrature_weights(f.grid);
    Load load;
    load.f = f;
    for (int c = 0; c < 3; ++c)
        load.f.values.col(c).array() -= w.dot(f.values.col(c)) / f.grid.area();
    if (load.f.values.cwiseAbs().maxCoeff() < 1e-14)
        throw DegenerateLoadError("normalize_mean: load vanishes after mean removal");
    return load;
}

MomentMatrix moment_matrix(const Load& load) {
    const Grid2D& g = load.f.grid;
    Eigen::VectorXd w = quadrature_weights(g);
    MomentMatrix mm;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            int n = g.idx(i, j);
            Eigen::Vector3d fn = load.f.values.row(n);
            mm.M.col(0) += w[n] * g.x1(i) * fn;
            mm.M.col(1) += w[n] * g.x2(j) * fn;
        }
    return mm;
}

double compatibility_residual(const Load& load, const Eigen::Matrix3d& R) {
    const Grid2D& g = load.f.grid;
    Eigen::VectorXd w = quadrature_weights(g);
    Eigen::Vector3d r3 = R.col(2);  // (R^T f)_3 = f . (R e3)
    double s = 0.0;
    for (int n = 0; n < g.size(); ++n) {
        double v = load.f.values.row(n).dot(r3);
        s += w[n] * v * v;
    }
    return std::sqrt(std::max(0.0, s));
}

Coefficients coefficients(const Load& load, const Eigen::Matrix3d& R) {
    const Grid2D& g = load.f.grid;
    Eigen::VectorXd w = quadrature_weights(g);
    Eigen::Vector3d r1 = R.col(0), r2 = R.col(1);
    double a = 0, b = 0, c12 = 0, c21 = 0;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            int n = g.idx(i, j);
            Eigen::Vector3d fn = load.f.values.row(n);
            double f1 = fn.dot(r1), f2 = fn.dot(r2);
            a += w[n] * g.x1(i) * f1;
            b += w[n] * g.x2(j) * f2;
            c12 += w[n] * g.x1(i) * f2;
            c21 += w[n] * g.x2(j) * f1;
        }
    Coefficients co;
    co.a = a;
    co.b = b;
    co.c = 0.5 * (c12 + c21);
    co.c_residual = std::abs(c12 - c21);
    return co;
}

Coefficients coefficients_from_moment(const MomentMatrix& mm, const Eigen::Matrix3d& R) {
    Eigen::Matrix3d RtM = R.transpose() * mm.M;
    Coefficients co;
    co.a = RtM(0, 0);
    co.b = RtM(1, 1);
    co.c = 0.5 * (RtM(1, 0) + RtM(0, 1));
    co.c_residual = std::abs(RtM(1, 0) - RtM(0, 1));
    return co;
}

}  // namespace platelab

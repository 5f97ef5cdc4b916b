#include "platelab/rotation.hpp"

#include <cmath>
#include <random>

namespace platelab {

namespace {
constexpr double kTauAngle = 1e-6;   // exclusion zone around the cut locus
constexpr double kTauRank = 1e-7;    // relative eigenvalue threshold for nullity
}  // namespace

void check_rotation(const Eigen::Matrix3d& R) {
    if ((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() > 1e-10 ||
        R.determinant() < 0)
        throw InputError("not a rotation matrix");
}

Eigen::Matrix3d exp_skew(const SkewMatrix& W) {
    const Eigen::Matrix3d Wm = W.matrix();
    const double t = W.coord_norm();  // rotation angle
    double s, c;  // sin(t)/t and (1-cos(t))/t^2
    if (t < 1e-4) {
        s = 1.0 - t * t / 6.0;
        c = 0.5 - t * t / 24.0;
    } else {
        s = std::sin(t) / t;
        c = (1.0 - std::cos(t)) / (t * t);
    }
    return Eigen::Matrix3d::Identity() + s * Wm + c * (Wm * Wm);
}

SkewMatrix log_rotation(const Eigen::Matrix3d& R) {
    check_rotation(R);
    double ct = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
    double t = std::acos(ct);
    if (t > M_PI - kTauAngle)
        throw BranchAmbiguityError("log_rotation: angle too close to pi");
    double s;  // t / (2 sin t)
    if (t < 1e-4)
        s = 0.5 + t * t / 12.0;
    else
        s = 0.5 * t / std::sin(t);
    return SkewMatrix::from_matrix(s * (R - R.transpose()));
}

double geodesic_distance(const Eigen::Matrix3d& Q, const Eigen::Matrix3d& R) {
    return log_rotation(R.transpose() * Q).frobenius_norm();
}

Eigen::Matrix3d maximize_F(const MomentMatrix& mm) {
    if (mm.M.norm() == 0.0) return Eigen::Matrix3d::Identity();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(mm.M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d UVt = svd.matrixU() * svd.matrixV().transpose();
    Eigen::Vector3d d(1.0, 1.0, UVt.determinant() > 0 ? 1.0 : -1.0);
    return svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
}

Eigen::Matrix3d maximize_F_gradient_ascent(const MomentMatrix& mm, int starts,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto random_rotation = [&] {
        Eigen::Vector3d w;
        do {
            w = Eigen::Vector3d(unif(rng), unif(rng), unif(rng));
        } while (w.norm() > 1.0 || w.norm() < 1e-6);
        // uniform direction in the unit ball, stretched to cover most angles
        return exp_skew(SkewMatrix(w[0], w[1], w[2]).scaled(0.999 * M_PI));
    };
    Eigen::Matrix3d best = Eigen::Matrix3d::Identity();
    double best_val = evaluate_F(mm, best);
    for (int s = 0; s < starts; ++s) {
        Eigen::Matrix3d R = random_rotation();
        double val = evaluate_F(mm, R);
        double eta = 1.0 / (1.0 + mm.M.norm());
        for (int it = 0; it < 500; ++it) {
            // Riemannian gradient: skew part of R^T M, stepped through exp
            Eigen::Matrix3d G = R.transpose() * mm.M;
            Eigen::Matrix3d W = 0.5 * (G - G.transpose());
            if (W.norm() * mm.M.norm() < 1e-14) break;
            bool moved = false;
            while (eta > 1e-14) {
                Eigen::Matrix3d Rn = R * exp_skew(SkewMatrix::from_matrix(eta * W));
                double vn = evaluate_F(mm, Rn);
                if (vn > val) {
                    R = Rn;
                    val = vn;
                    eta *= 1.3;
                    moved = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!moved) break;
        }
        if (val > best_val) {
            best_val = val;
            best = R;
        }
    }
    return best;
}

namespace {

Eigen::Matrix3d q_form_at(const MomentMatrix& mm, const Eigen::Matrix3d& R) {
    auto q = [&](const SkewMatrix& W) {
        Eigen::Matrix3d Wm = W.matrix();
        return evaluate_F(mm, R * Wm * Wm);
    };
    SkewMatrix basis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    Eigen::Matrix3d Q;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            SkewMatrix s(basis[i].w12 + basis[j].w12, basis[i].w13 + basis[j].w13,
                         basis[i].w23 + basis[j].w23);
            double qij = (i == j) ? q(basis[i])
                                  : 0.5 * (q(s) - q(basis[i]) - q(basis[j]));
            Q(i, j) = Q(j, i) = qij;
        }
    }
    return Q;
}

// deterministic sign choice for eigenvectors
Eigen::Vector3d canonical_sign(const Eigen::Vector3d& v) {
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    return v[arg] < 0 ? Eigen::Vector3d(-v) : v;
}

}  // namespace

OptimalRotationSet classify_optimal_set(const MomentMatrix& mm, double tau_zero) {
    OptimalRotationSet set;
    set.mm = mm;
    set.representative = maximize_F(mm);
    set.max_value = evaluate_F(mm, set.representative);
    if (mm.M.norm() <= tau_zero) {
        set.dim = 3;  // F vanishes identically: every rotation is optimal
        set.representative = Eigen::Matrix3d::Identity();
        set.max_value = 0.0;
        return set;
    }
    set.q_form = q_form_at(mm, set.representative);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(set.q_form);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    int nullity = 0;
    for (int i = 0; i < 3; ++i)
        if (std::abs(es.eigenvalues()[i]) <= kTauRank * scale) ++nullity;
    if (nullity == 2 || nullity == 3)
        throw InconsistencyError(
            "classify_optimal_set: optimal set of dimension " + std::to_string(nullity) +
            " detected; only 0, 1 and 3 are possible");
    set.dim = nullity;
    if (set.dim == 1) {
        // eigenvalues are sorted ascending; q is negative semidefinite so the
        // kernel eigenvalue is the last one
        Eigen::Vector3d g = canonical_sign(es.eigenvectors().col(2));
        g /= std::sqrt(2.0);  // unit Frobenius norm
        set.generator = SkewMatrix(g[0], g[1], g[2]);
    }
    return set;
}

OptimalRotationSet classify_optimal_set(const Load& load, const MomentMatrix& mm) {
    return classify_optimal_set(mm, 1e-3 * load.tolerance_scale());
}

namespace {

void check_in_set(const OptimalRotationSet& set, const Eigen::Matrix3d& R) {
    check_rotation(R);
    double tol = 1e-7 * std::max(1.0, set.mm.M.norm());
    if (set.max_value - evaluate_F(set.mm, R) > tol)
        throw InputError("rotation is not in the optimal set");
}

}  // namespace

std::vector<SkewMatrix> tangent_space(const OptimalRotationSet& set, const Eigen::Matrix3d& R) {
    check_in_set(set, R);
    if (set.dim == 3) {
        return {SkewMatrix(1, 0, 0).scaled(1 / std::sqrt(2.0)),
                SkewMatrix(0, 1, 0).scaled(1 / std::sqrt(2.0)),
                SkewMatrix(0, 0, 1).scaled(1 / std::sqrt(2.0))};
    }
    if (set.dim == 0) return {};
    Eigen::Matrix3d Q = q_form_at(set.mm, R);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Q);
    // q is negative semidefinite; ascending order puts the kernel last
    Eigen::Vector3d g = canonical_sign(es.eigenvectors().col(2)) / std::sqrt(2.0);
    return {SkewMatrix(g[0], g[1], g[2])};
}

std::vector<SkewMatrix> normal_space(const OptimalRotationSet& set, const Eigen::Matrix3d& R) {
    check_in_set(set, R);
    if (set.dim == 3) return {};
    if (set.dim == 0)
        return {SkewMatrix(1, 0, 0).scaled(1 / std::sqrt(2.0)),
                SkewMatrix(0, 1, 0).scaled(1 / std::sqrt(2.0)),
                SkewMatrix(0, 0, 1).scaled(1 / std::sqrt(2.0))};
    Eigen::Matrix3d Q = q_form_at(set.mm, R);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Q);
    std::vector<SkewMatrix> out;
    for (int i = 0; i < 2; ++i) {
        Eigen::Vector3d v = canonical_sign(es.eigenvectors().col(i)) / std::sqrt(2.0);
        out.emplace_back(v[0], v[1], v[2]);
    }
    return out;
}

Eigen::Matrix3d project_to_set(const Eigen::Matrix3d& R, const OptimalRotationSet& set,
                               double tau_proj) {
    check_rotation(R);
    if (set.dim == 3) return R;
    auto dist = [&](const Eigen::Matrix3d& Q) {
        try {
            return geodesic_distance(R, Q);
        } catch (const BranchAmbiguityError&) {
            return M_PI * std::sqrt(2.0);
        }
    };
    if (set.dim == 0) {
        double d = dist(set.representative);
        if (d > tau_proj)
            throw ProjectionUndefinedError("project_to_set: point beyond injectivity guard");
        return set.representative;
    }
    // dim == 1: one-dimensional search along the geodesic circle
    const SkewMatrix G = *set.generator;  // |G|_F = 1, so t has period 2*pi*sqrt(2)
    const double period = 2.0 * M_PI * std::sqrt(2.0);
    auto point = [&](double t) { return Eigen::Matrix3d(set.representative * exp_skew(G.scaled(t))); };
    auto d2 = [&](double t) {
        double d = dist(point(t));
        return d * d;
    };
    const int nscan = 512;
    double tbest = 0.0, dbest = d2(0.0);
    for (int k = 1; k < nscan; ++k) {
        double t = period * k / nscan;
        double d = d2(t);
        if (d < dbest) {
            dbest = d;
            tbest = t;
        }
    }
    // golden-section refinement around the scan minimum
    double lo = tbest - period / nscan, hi = tbest + period / nscan;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = d2(x1), f2 = d2(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = d2(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = d2(x2);
        }
    }
    double t = 0.5 * (lo + hi);
    // Newton polish on t with central differences
    for (int it = 0; it < 8; ++it) {
        double eps = 1e-6;
        double fp = (d2(t + eps) - d2(t - eps)) / (2 * eps);
        double fpp = (d2(t + eps) - 2 * d2(t) + d2(t - eps)) / (eps * eps);
        if (!(std::abs(fpp) > 1e-12)) break;
        double step = fp / fpp;
        if (std::abs(step) > period / nscan) break;
        t -= step;
    }
    if (std::sqrt(d2(t)) > tau_proj)
        throw ProjectionUndefinedError("project_to_set: point beyond injectivity guard");
    return point(t);
}

}  // namespace platelab

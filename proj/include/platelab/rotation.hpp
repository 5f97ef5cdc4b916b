#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "platelab/load.hpp"

namespace platelab {

// Skew matrix in the coordinates (w12, w13, w23) = entries above the
// diagonal, so the closed-form tangent/normal characterizations transcribe
// literally.
struct SkewMatrix {
    double w12 = 0, w13 = 0, w23 = 0;

    SkewMatrix() = default;
    SkewMatrix(double a12, double a13, double a23) : w12(a12), w13(a13), w23(a23) {}

    Eigen::Matrix3d matrix() const {
        Eigen::Matrix3d W;
        W << 0, w12, w13, -w12, 0, w23, -w13, -w23, 0;
        return W;
    }
    static SkewMatrix from_matrix(const Eigen::Matrix3d& W) {
        return SkewMatrix(W(0, 1), W(0, 2), W(1, 2));
    }
    Eigen::Vector3d coords() const { return {w12, w13, w23}; }
    double coord_norm() const { return coords().norm(); }
    double frobenius_norm() const { return std::sqrt(2.0) * coord_norm(); }
    SkewMatrix scaled(double s) const { return SkewMatrix(s * w12, s * w13, s * w23); }
};

Eigen::Matrix3d exp_skew(const SkewMatrix& W);         // Rodrigues closed form
SkewMatrix log_rotation(const Eigen::Matrix3d& R);     // principal branch
double geodesic_distance(const Eigen::Matrix3d& Q, const Eigen::Matrix3d& R);

void check_rotation(const Eigen::Matrix3d& R);

// Special orthogonal Procrustes: the closed-form maximizer of F(R) = M : R.
Eigen::Matrix3d maximize_F(const MomentMatrix& mm);

// Projected-gradient-ascent oracle used to cross-check maximize_F.
Eigen::Matrix3d maximize_F_gradient_ascent(const MomentMatrix& mm, int starts,
                                           std::uint64_t seed);

struct OptimalRotationSet {
    Eigen::Matrix3d representative = Eigen::Matrix3d::Identity();
    int dim = 0;  // 0, 1 or 3 — never 2
    std::optional<SkewMatrix> generator;  // unit Frobenius norm, present iff dim == 1
    Eigen::Matrix3d q_form = Eigen::Matrix3d::Zero();  // W -> F(R W^2) in skew coords
    double max_value = 0;
    MomentMatrix mm;  // kept so tangent/normal spaces can be rebuilt at any R
};

OptimalRotationSet classify_optimal_set(const Load& load, const MomentMatrix& mm);
OptimalRotationSet classify_optimal_set(const MomentMatrix& mm, double tau_zero);

// Orthonormal (unit Frobenius) bases of the kernel of the q-form at R and of
// its orthogonal complement in the skew space.
std::vector<SkewMatrix> tangent_space(const OptimalRotationSet& set, const Eigen::Matrix3d& R);
std::vector<SkewMatrix> normal_space(const OptimalRotationSet& set, const Eigen::Matrix3d& R);

// Closest-point projection onto the set (well defined only near the set;
// guarded by tau_proj in geodesic distance units).
Eigen::Matrix3d project_to_set(const Eigen::Matrix3d& R, const OptimalRotationSet& set,
                               double tau_proj = 1.5);

}  // namespace platelab

#pragma once

#include "platelab/grid.hpp"

namespace platelab {

// Dead load: force density per unit area of S, constant through the
// thickness, with zero quadrature mean in each component.
struct Load {
    VectorField2D f;  // d = 3

    double l2_norm() const;
    double sup_norm() const { return f.values.cwiseAbs().maxCoeff(); }
    // default tolerance scale used for mean-zero / compatibility checks
    double tolerance_scale() const { return 1e-6 * l2_norm() * std::sqrt(f.grid.area()); }
};

// Removes the quadrature mean componentwise; throws if the remainder vanishes.
Load normalize_mean(const VectorField2D& f);

// M_ij = integral of f_i x_j over S for j = 1,2; third column identically 0.
// Represents the linear functional F(A) = M : A = integral of f . A(x',0).
struct MomentMatrix {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
};

MomentMatrix moment_matrix(const Load& load);

inline double evaluate_F(const MomentMatrix& mm, const Eigen::Matrix3d& A) {
    return (mm.M.transpose() * A).trace();
}

// L2 norm of the third component of R^T f; the compatibility condition holds
// at R iff this is below tolerance.
double compatibility_residual(const Load& load, const Eigen::Matrix3d& R);

// First moments of the rotated load: a = ∫ f·x₁R¹, b = ∫ f·x₂R²,
// c = ∫ f·x₁R² and c' = ∫ f·x₂R¹ agree at optimal rotations; c stores their
// average and c_residual the discrepancy |c − c'|.
struct Coefficients {
    double a = 0, b = 0, c = 0;
    double c_residual = 0;
};

Coefficients coefficients(const Load& load, const Eigen::Matrix3d& R);

// Same coefficients read off the moment matrix: (RᵀM) has entries
// a = (RᵀM)₁₁, b = (RᵀM)₂₂, c = (RᵀM)₂₁, c' = (RᵀM)₁₂.  Equal to the
// quadrature route by linearity; used where only M is available.
Coefficients coefficients_from_moment(const MomentMatrix& mm, const Eigen::Matrix3d& R);

}  // namespace platelab

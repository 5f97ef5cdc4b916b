#pragma once

#include <functional>

#include "platelab/isometry.hpp"
#include "platelab/rotation.hpp"

namespace platelab {

// Isotropic St. Venant-Kirchhoff material.  Q is the quadratic form of the
// density at the identity; q_reduced relaxes the transverse row/column.
struct ElasticModel {
    double lambda = 1.0, mu = 1.0;

    ElasticModel() = default;
    ElasticModel(double l, double m);

    // Q(A) = lambda tr(A)^2 + 2 mu |sym A|^2
    double quadratic_form(const Eigen::Matrix3d& A) const;
    // min over a of Q(A + a (x) e3 + e3 (x) a) with A embedded in the plane,
    // by the 3x3 SPD stationarity solve
    double q_reduced(const Eigen::Matrix2d& A) const;
    // derivative of q_reduced with respect to the (full, not symmetrized)
    // 2x2 argument; from the envelope identity at the minimizing a
    Eigen::Matrix2d q_reduced_gradient(const Eigen::Matrix2d& A) const;
    // W(F) = (lambda/2) tr(E)^2 + mu |E|^2, E = (F^T F - Id)/2
    double stored_density(const Eigen::Matrix3d& F) const;
};

struct EnergySplit {
    double total = 0, membrane = 0, bending = 0;
};

// (1/8) int q_reduced(grad u^T + grad u + grad v (x) grad v)
// + (1/24) int q_reduced(hess v)
EnergySplit energy_vk(const VectorField2D& u, const ScalarField2D& v,
                      const ElasticModel& m);

// Gradient of the discretized energy_vk total with respect to the node
// values of u (size x 2) and v (size), assembled by transposed stencils.
void energy_vk_gradient(const VectorField2D& u, const ScalarField2D& v,
                        const ElasticModel& m, Eigen::MatrixXd& grad_u,
                        Eigen::VectorXd& grad_v);

// (1/24) int q_reduced(grad y^T grad nu) with nu = d1 y ^ d2 y; y must be an
// isometric surface up to tau_iso in sup norm.
double energy_kl(const VectorField2D& y, const ElasticModel& m,
                 double tau_iso = 1e-5);

struct AdmissibleQuadruplet {
    VectorField2D u;  // d = 2
    ScalarField2D v;
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    SkewMatrix W;
};

// R must lie in the optimal rotation set (up to the value gap used by the
// set itself) and W in its normal space at R.
void check_admissible(const AdmissibleQuadruplet& q, const OptimalRotationSet& set);

struct TotalVK {
    double value = 0;
    EnergySplit elastic;
    // the three load couplings: int f . R(u,0), int f . RW(0,0,v),
    // int f . RW^2(x',0)
    double load_u = 0, load_v = 0, load_w2 = 0;
};

TotalVK total_vk(const AdmissibleQuadruplet& q, const Load& load,
                 const ElasticModel& m);
// overload with a precomputed optimal set (hot loops)
TotalVK total_vk(const AdmissibleQuadruplet& q, const Load& load,
                 const ElasticModel& m, const OptimalRotationSet& set);

struct TotalKL {
    double value = 0, elastic = 0, load = 0;
};

TotalKL total_kl(const VectorField2D& y, const Load& load, const ElasticModel& m,
                 double tau_iso = 1e-5);

// 3D energy with rescaled gradient: int over S x (-1/2,1/2) of W(grad_h y),
// where the transverse column of grad_h is (1/h) d3 y.
double energy_h3d(const Field3D& y, double h, const ElasticModel& m);

// energy_h3d minus h^2 int f . y (the load is constant in x3).
double total_h3d(const Field3D& y, double h, const Load& load, const ElasticModel& m);

// y(x) = R(x', h x3) + R(-h^2 x3 grad v, h v): rigid motion plus the
// out-of-plane ansatz whose energy is O(h^4).
Field3D test_deformation_vk(const Eigen::Matrix3d& R, const ScalarField2D& v,
                            double h, int n3 = 9);

// y(x) = R y2d + h x3 R nu with nu = d1 y2d ^ d2 y2d; y2d must be an
// approximate isometric surface (residual <= tau_iso).
Field3D test_deformation_kl(const Eigen::Matrix3d& R, const VectorField2D& y2d,
                            double h, int n3 = 9, double tau_iso = 1e-5);

struct ScalingStudy {
    std::vector<double> h_values;  // decreasing
    std::vector<double> energies;
    double slope = 0, intercept = 0, residual = 0;  // fit of log E vs log h
    int grid_n = 0;  // planar resolution at which the energies converged
};

// energy(h, n) evaluates the family at thickness h on an n x n grid.  The
// grid is refined (n -> 2n-1) until every sample moves by less than 10% of
// the smallest energy, then log E is regressed on log h.
ScalingStudy scaling_study(const std::function<double(double, int)>& energy,
                           const std::vector<double>& h_values, int n_start = 33,
                           int n_max = 513);

}  // namespace platelab

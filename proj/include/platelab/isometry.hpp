#pragma once

#include "platelab/grid.hpp"

namespace platelab {

// L1 norm of det((grad)^2 v): zero (up to discretization) exactly for
// developable out-of-plane profiles.
double developability_residual(const ScalarField2D& v);

// Relative developability tolerance: 1e-6 times the L1 norm of the hessian.
double developability_tolerance(const ScalarField2D& v);

// logistic(y . x + theta): developable by construction (rank-one hessian).
ScalarField2D sigmoid_ridge(const Grid2D& g, const Eigen::Vector2d& y, double theta);

struct LinearizedSolve {
    VectorField2D u;      // d = 2, gauge fixed (zero mean, zero mean skew gradient)
    double residual = 0;  // sqrt of the weighted least-squares functional at u
    int iterations = 0;
};

// Least-squares solution of sym(grad u) = -1/2 grad v (x) grad v by conjugate
// gradients on the normal equations.  tau_dev < 0 selects the default
// developability tolerance; pass infinity to solve for a best-effort
// compensation of a non-developable profile (residual reported).
LinearizedSolve solve_u_linearized_full(const ScalarField2D& v, double tau_dev = -1.0);
VectorField2D solve_u_linearized(const ScalarField2D& v, double tau_dev = -1.0);

struct IsometricEmbedding {
    VectorField2D y;  // d = 3, y = (x' + u, v)
    VectorField2D u;  // d = 2, in-plane displacement
    ScalarField2D v;
    double residual = 0;        // sup norm of grad(y)^T grad(y) - Id
    double grad_sup = 0;        // sup norm of grad v
    double u_sup = 0;           // sup norm of u
    double estimate_bound = 0;  // |hess v|_inf |grad v|_inf + |grad v|_inf^2
};

// Nonlinear construction: F = sqrt(Id - grad v (x) grad v), h_F =
// (1/det F) F^T curl F, theta the zero-mean potential of h_F, grad phi =
// exp(i theta) F, u = phi - x'.  Requires |grad v|_inf <= 1/2 and a
// developable v.
IsometricEmbedding isometric_embedding(const ScalarField2D& v);

// nu = d1 y ^ d2 y (not normalized; unit length where y is isometric).
VectorField2D normal_field(const VectorField2D& y);

// sup norm of grad(y)^T grad(y) - Id over the grid (d = 3 surfaces).
double isometry_residual(const VectorField2D& y);

}  // namespace platelab

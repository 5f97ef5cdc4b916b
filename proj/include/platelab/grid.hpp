#pragma once

#include <Eigen/Dense>
#include <functional>

#include "platelab/errors.hpp"

namespace platelab {

// Uniform vertex-centered tensor grid on (x1min,x1max) x (x2min,x2max).
// Node (i,j) sits at (x1min + i*h1, x2min + j*h2) and is stored at index
// i + n1*j (x1 fastest).
struct Grid2D {
    double x1min = -0.5, x1max = 0.5;
    double x2min = -0.5, x2max = 0.5;
    int n1 = 0, n2 = 0;

    Grid2D() = default;
    Grid2D(double a1, double b1, double a2, double b2, int m1, int m2);

    static Grid2D unit_square(int n) { return Grid2D(-0.5, 0.5, -0.5, 0.5, n, n); }

    double h1() const { return (x1max - x1min) / (n1 - 1); }
    double h2() const { return (x2max - x2min) / (n2 - 1); }
    double x1(int i) const { return x1min + i * h1(); }
    double x2(int j) const { return x2min + j * h2(); }
    double area() const { return (x1max - x1min) * (x2max - x2min); }
    int size() const { return n1 * n2; }
    int idx(int i, int j) const { return i + n1 * j; }

    bool operator==(const Grid2D&) const = default;
};

struct ScalarField2D {
    Grid2D grid;
    Eigen::VectorXd values;  // grid.size() entries

    ScalarField2D() = default;
    explicit ScalarField2D(const Grid2D& g)
        : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
    double& at(int i, int j) { return values[grid.idx(i, j)]; }
    double at(int i, int j) const { return values[grid.idx(i, j)]; }
};

struct VectorField2D {
    Grid2D grid;
    Eigen::MatrixXd values;  // grid.size() x d

    VectorField2D() = default;
    VectorField2D(const Grid2D& g, int d)
        : grid(g), values(Eigen::MatrixXd::Zero(g.size(), d)) {}
    int dim() const { return static_cast<int>(values.cols()); }
    ScalarField2D component(int c) const;
};

// Symmetric 2x2 matrix field; h21 == h12 holds by construction because the
// two one-dimensional difference operators commute.
struct SymMatrixField2D {
    Grid2D grid;
    Eigen::VectorXd h11, h12, h22;
};

// Deformations of the rescaled plate S x (-1/2,1/2); node (i,j,k) is stored
// at row idx(i,j) + size()*k, transverse coordinate x3 = -1/2 + k/(n3-1).
struct Field3D {
    Grid2D grid;
    int n3 = 0;
    Eigen::MatrixXd values;  // (grid.size()*n3) x 3

    Field3D() = default;
    Field3D(const Grid2D& g, int m3);
    double x3(int k) const { return -0.5 + static_cast<double>(k) / (n3 - 1); }
    double h3() const { return 1.0 / (n3 - 1); }
    int row(int i, int j, int k) const { return grid.idx(i, j) + grid.size() * k; }
};

// Composite Simpson weights on n uniform nodes with spacing h (3/8 rule used
// for the trailing intervals when the interval count is odd).  Positive, so
// the induced quadrature is monotone; exact for cubics along each axis.
Eigen::VectorXd quadrature_weights(int n, double h);

// Per-node 2D quadrature weights (tensor product of the 1D rules).
Eigen::VectorXd quadrature_weights(const Grid2D& g);

double integrate(const ScalarField2D& f);

// First-derivative stencils: central differences inside, one-sided
// second-order at the boundary.  Exact for quadratics.
void apply_d1(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);
void apply_d2(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);
// Adjoints (plain matrix transposes of the stencils, no quadrature weights).
void apply_d1_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);
void apply_d2_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);

// First-derivative variant with cubic one-sided boundary closure; hessian()
// is the composition of these, which keeps second-order accuracy up to the
// boundary and exact symmetry of the mixed entries.
void apply_dh1(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);
void apply_dh2(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);
void apply_dh1_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);
void apply_dh2_transpose(const Grid2D& g, const Eigen::VectorXd& in, Eigen::VectorXd& out);

VectorField2D gradient(const ScalarField2D& f);
SymMatrixField2D hessian(const ScalarField2D& f);

// Solves grad(theta) ~ g for a zero-mean scalar potential by path integration
// along grid lines from the (x1min,x2min) corner, averaged over the two
// staircase orders.  tau_curl < 0 selects the default 1e-6*|g|_inf*|S|.
ScalarField2D integrate_potential(const VectorField2D& g, double tau_curl = -1.0);

// Quadrature-weighted L1 norm of the discrete curl d1(g2) - d2(g1).
double curl_residual(const VectorField2D& g);

ScalarField2D sample(const Grid2D& g, const std::function<double(double, double)>& f);
VectorField2D sample_vector(const Grid2D& g, int d,
                            const std::function<Eigen::VectorXd(double, double)>& f);

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& values, const char* what);

}  // namespace platelab

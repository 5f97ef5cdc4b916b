#include "doctest.h"
#include "platelab/load.hpp"

#include <cmath>

using namespace platelab;

namespace {

Load make_load(int n, const std::function<Eigen::Vector3d(double, double)>& f) {
    Grid2D g = Grid2D::unit_square(n);
    return normalize_mean(sample_vector(g, 3, [&](double x1, double x2) -> Eigen::VectorXd {
        return f(x1, x2);
    }));
}

// optimal frame for the f = x1 e3 example: first column e3
Eigen::Matrix3d example_b_rotation() {
    Eigen::Matrix3d R;
    R.col(0) = Eigen::Vector3d::UnitZ();
    R.col(1) = Eigen::Vector3d::UnitY();
    R.col(2) = -Eigen::Vector3d::UnitX();
    return R;
}

}  // namespace

TEST_CASE("normalize_mean") {
    Load l1 = make_load(33, [](double x1, double) { return Eigen::Vector3d(x1, 0, 0); });
    CHECK(l1.f.values.col(0).maxCoeff() == doctest::Approx(0.5).epsilon(1e-14));

    Load l2 = make_load(33, [](double x1, double) { return Eigen::Vector3d(1 + x1, 0, 0); });
    CHECK((l1.f.values - l2.f.values).cwiseAbs().maxCoeff() < 1e-13);

    // already mean-zero loads come back unchanged
    Load l3 = make_load(33, [](double x1, double) { return Eigen::Vector3d(0, 0, x1); });
    CHECK(l3.f.values.col(2).maxCoeff() == doctest::Approx(0.5).epsilon(1e-14));

    Grid2D g = Grid2D::unit_square(9);
    VectorField2D constant(g, 3);
    constant.values.col(1).setConstant(4.2);
    CHECK_THROWS_AS(normalize_mean(constant), DegenerateLoadError);
    VectorField2D planar(g, 2);
    CHECK_THROWS_AS(normalize_mean(planar), InputError);
}

TEST_CASE("moment matrix of the x1*e3 example") {
    Load load = make_load(129, [](double x1, double) { return Eigen::Vector3d(0, 0, x1); });
    MomentMatrix mm = moment_matrix(load);
    CHECK(mm.M(2, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
    Eigen::Matrix3d rest = mm.M;
    rest(2, 0) = 0;
    CHECK(rest.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(mm.M.col(2).cwiseAbs().maxCoeff() == 0.0);  // third column identically zero
    CHECK(mm.M.determinant() == 0.0);

    // F(A) = M : A against direct quadrature of f . A(x',0)
    Eigen::Matrix3d A;
    A << 0.3, -1.2, 0.4, 0.8, 0.1, -0.7, 1.5, 0.2, 0.9;
    double direct = 0.0;
    {
        Eigen::VectorXd w = quadrature_weights(load.f.grid);
        const Grid2D& g = load.f.grid;
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                Eigen::Vector3d ax = A * Eigen::Vector3d(g.x1(i), g.x2(j), 0.0);
                direct += w[g.idx(i, j)] * load.f.values.row(g.idx(i, j)).dot(ax);
            }
    }
    CHECK(evaluate_F(mm, A) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("moment matrix: x2 load and linearity of F") {
    Load load = make_load(65, [](double, double x2) { return Eigen::Vector3d(x2, 0, 0); });
    MomentMatrix mm = moment_matrix(load);
    CHECK(mm.M(0, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-9));

    Eigen::Matrix3d A = Eigen::Matrix3d::Random(), B = Eigen::Matrix3d::Random();
    CHECK(evaluate_F(mm, 2.0 * A + 0.5 * B) ==
          doctest::Approx(2.0 * evaluate_F(mm, A) + 0.5 * evaluate_F(mm, B)).epsilon(1e-13));
    for (int i = 0; i < 3; ++i) {
        Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
        E(i, 2) = 1.0;
        CHECK(evaluate_F(mm, E) == 0.0);
    }
}

TEST_CASE("compatibility residual") {
    Load load = make_load(65, [](double x1, double) { return Eigen::Vector3d(0, 0, x1); });
    CHECK(compatibility_residual(load, example_b_rotation()) < 1e-9);
    CHECK(compatibility_residual(load, Eigen::Matrix3d::Identity()) ==
          doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-9));

    Load planar = make_load(65, [](double x1, double x2) { return Eigen::Vector3d(x1, x2, 0); });
    CHECK(compatibility_residual(planar, Eigen::Matrix3d::Identity()) == 0.0);
}

TEST_CASE("coefficients at the example optimal frame") {
    Load load = make_load(129, [](double x1, double) { return Eigen::Vector3d(0, 0, x1); });
    Eigen::Matrix3d R = example_b_rotation();
    Coefficients co = coefficients(load, R);
    CHECK(co.a == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
    CHECK(std::abs(co.b) < 1e-9);
    CHECK(std::abs(co.c) < 1e-9);
    CHECK(co.c_residual < 1e-9);

    // a + b = F(R) for any rotation
    MomentMatrix mm = moment_matrix(load);
    Eigen::Matrix3d Q =
        Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
    Coefficients cq = coefficients(load, Q);
    CHECK(cq.a + cq.b == doctest::Approx(evaluate_F(mm, Q)).epsilon(1e-12));

    // moment-matrix route agrees with the quadrature route
    Coefficients cm = coefficients_from_moment(mm, Q);
    CHECK(cm.a == doctest::Approx(cq.a).epsilon(1e-12));
    CHECK(cm.b == doctest::Approx(cq.b).epsilon(1e-12));
    CHECK(cm.c == doctest::Approx(cq.c).epsilon(1e-12));
}

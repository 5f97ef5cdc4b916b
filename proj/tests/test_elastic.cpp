#include "doctest.h"
#include "platelab/elastic.hpp"

#include <cmath>
#include <random>

using namespace platelab;

namespace {

Load example_load(const Grid2D& g) {  // f = x1 e3
    return normalize_mean(sample_vector(g, 3, [](double x1, double) {
        return Eigen::Vector3d(0.0, 0.0, x1);
    }));
}

Eigen::Matrix3d lifted_frame() {  // maps e1 -> e3; maximizes the moment functional
    Eigen::Matrix3d R;
    R.col(0) = Eigen::Vector3d::UnitZ();
    R.col(1) = Eigen::Vector3d::UnitY();
    R.col(2) = -Eigen::Vector3d::UnitX();
    return R;
}

double q_reduced_isotropic(double lambda, double mu, const Eigen::Matrix2d& A) {
    Eigen::Matrix2d S = 0.5 * (A + A.transpose());
    return 2.0 * mu * S.squaredNorm() +
           (2.0 * mu * lambda / (2.0 * mu + lambda)) * S.trace() * S.trace();
}

}  // namespace

TEST_CASE("quadratic form and stored density basics") {
    ElasticModel m;
    CHECK(m.quadratic_form(Eigen::Matrix3d::Zero()) == 0.0);
    CHECK(m.quadratic_form(Eigen::Matrix3d::Identity()) == doctest::Approx(15.0));
    CHECK(m.stored_density(Eigen::Matrix3d::Identity()) == 0.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto rand3 = [&] {
        Eigen::Matrix3d B;
        for (int i = 0; i < 9; ++i) B(i / 3, i % 3) = unif(rng);
        return B;
    };
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Matrix3d B = rand3();
        // rotations are stress free
        Eigen::Matrix3d R = exp_skew(SkewMatrix(unif(rng), unif(rng), unif(rng)));
        CHECK(m.stored_density(R) < 1e-28);
        CHECK(m.stored_density(B + Eigen::Matrix3d::Identity()) >= 0.0);
        // the quadratic form is the second-order expansion of the density at Id
        double eps = 1e-4;
        double w = m.stored_density(Eigen::Matrix3d::Identity() + eps * B);
        CHECK(w == doctest::Approx(0.5 * eps * eps * m.quadratic_form(B))
                       .epsilon(5e-4 * eps));
    }
}

TEST_CASE("reduced quadratic form against the isotropic closed form") {
    ElasticModel m;
    CHECK(m.q_reduced(Eigen::Matrix2d::Zero()) == 0.0);
    CHECK(m.q_reduced(Eigen::Matrix2d::Identity()) == doctest::Approx(20.0 / 3.0));

    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.2, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        ElasticModel mm(pos(rng), pos(rng));
        Eigen::Matrix2d A;
        A << unif(rng), unif(rng), unif(rng), unif(rng);
        double q = mm.q_reduced(A);
        double oracle = q_reduced_isotropic(mm.lambda, mm.mu, A);
        CHECK(q == doctest::Approx(oracle).epsilon(1e-10));
        // relaxation can only decrease the unreduced value
        Eigen::Matrix3d A3 = Eigen::Matrix3d::Zero();
        A3.topLeftCorner<2, 2>() = A;
        CHECK(q <= mm.quadratic_form(A3) + 1e-12);
        // coercivity on the symmetric part with constant 2 mu
        Eigen::Matrix2d S = 0.5 * (A + A.transpose());
        if (S.squaredNorm() > 1e-12)
            CHECK(q >= 2.0 * mm.mu * S.squaredNorm() - 1e-10);
    }
}

TEST_CASE("reduced-form gradient matches finite differences") {
    ElasticModel m(1.3, 0.8);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::Matrix2d A;
        A << unif(rng), unif(rng), unif(rng), unif(rng);
        Eigen::Matrix2d G = m.q_reduced_gradient(A);
        double eps = 1e-6;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Eigen::Matrix2d Ap = A, Am = A;
                Ap(i, j) += eps;
                Am(i, j) -= eps;
                double fd = (m.q_reduced(Ap) - m.q_reduced(Am)) / (2 * eps);
                CHECK(G(i, j) == doctest::Approx(fd).epsilon(1e-7));
            }
    }
}

TEST_CASE("two-dimensional energy: zero, pure bending, and the membrane kill") {
    Grid2D g = Grid2D::unit_square(129);
    ElasticModel m;
    EnergySplit zero = energy_vk(VectorField2D(g, 2), ScalarField2D(g), m);
    CHECK(zero.total == 0.0);

    // v = x1^2: constant hessian diag(2,0), bending = (1/24) qbar(diag(2,0))
    ScalarField2D v = sample(g, [](double x1, double) { return x1 * x1; });
    EnergySplit split = energy_vk(VectorField2D(g, 2), v, m);
    CHECK(split.bending == doctest::Approx((32.0 / 3.0) / 24.0).epsilon(1e-10));
    CHECK(split.membrane > 0.0);

    // the matched in-plane displacement kills the membrane term
    ScalarField2D vs = sample(g, [](double x1, double) { return 0.1 * std::sin(x1); });
    VectorField2D u = solve_u_linearized(vs);
    EnergySplit s = energy_vk(u, vs, m);
    CHECK(s.bending > 1e-6);
    CHECK(s.membrane <= 1e-10 * s.bending);
}

TEST_CASE("energy gradient matches central differences") {
    Grid2D g = Grid2D::unit_square(33);
    ElasticModel m;
    ScalarField2D v = sample(g, [](double x1, double x2) {
        return 0.2 * std::sin(x1 + 0.3) * std::cos(2 * x2);
    });
    VectorField2D u = sample_vector(g, 2, [](double x1, double x2) {
        return Eigen::Vector2d(0.05 * std::sin(2 * x1) * x2, 0.04 * std::cos(x1 - x2));
    });
    Eigen::MatrixXd gu;
    Eigen::VectorXd gv;
    energy_vk_gradient(u, v, m, gu, gv);

    std::mt19937_64 rng(14);
    std::uniform_int_distribution<int> pick(0, g.size() - 1);
    double eps = 1e-6;
    for (int trial = 0; trial < 12; ++trial) {
        int n = pick(rng);
        for (int c = 0; c < 2; ++c) {
            VectorField2D up = u, um = u;
            up.values(n, c) += eps;
            um.values(n, c) -= eps;
            double fd = (energy_vk(up, v, m).total - energy_vk(um, v, m).total) / (2 * eps);
            CHECK(gu(n, c) == doctest::Approx(fd).epsilon(1e-5));
        }
        ScalarField2D vp = v, vm = v;
        vp.values[n] += eps;
        vm.values[n] -= eps;
        double fd = (energy_vk(u, vp, m).total - energy_vk(u, vm, m).total) / (2 * eps);
        CHECK(gv[n] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("bending energy of surfaces: flat, rigid, cylinder") {
    Grid2D g = Grid2D::unit_square(257);
    ElasticModel m;
    VectorField2D flat = sample_vector(g, 3, [](double x1, double x2) {
        return Eigen::Vector3d(x1, x2, 0.0);
    });
    CHECK(energy_kl(flat, m) == doctest::Approx(0.0).epsilon(1e-14));

    Eigen::Matrix3d R = exp_skew(SkewMatrix(0.4, -0.3, 0.9));
    VectorField2D rigid = flat;
    rigid.values = (R * flat.values.transpose()).transpose();
    rigid.values.rowwise() += Eigen::RowVector3d(0.3, -1.0, 0.2);
    CHECK(energy_kl(rigid, m) < 1e-20);

    VectorField2D cyl = sample_vector(g, 3, [](double x1, double x2) {
        return Eigen::Vector3d(std::sin(x1), x2, std::cos(x1));
    });
    // second fundamental form diag(1,0): value (1/24) qbar(diag(1,0)) = 1/9
    CHECK(energy_kl(cyl, m, 1e-4) == doctest::Approx(1.0 / 9.0).epsilon(1e-4));

    VectorField2D stretched = flat;
    stretched.values.col(0) *= 1.5;
    CHECK_THROWS_AS(energy_kl(stretched, m), NotAnIsometryError);
}

TEST_CASE("total energy, plate ansatz: breakdown and oracle") {
    Grid2D g = Grid2D::unit_square(65);
    ElasticModel m;
    Load load = example_load(g);
    MomentMatrix mm = moment_matrix(load);
    OptimalRotationSet set = classify_optimal_set(load, mm);
    Eigen::Matrix3d R = lifted_frame();

    AdmissibleQuadruplet zero{VectorField2D(g, 2), ScalarField2D(g), R, SkewMatrix()};
    CHECK(total_vk(zero, load, m, set).value == doctest::Approx(0.0).epsilon(1e-14));

    AdmissibleQuadruplet q;
    q.u = sample_vector(g, 2, [](double x1, double x2) {
        return Eigen::Vector2d(0.02 * x1 * x2, -0.03 * std::sin(x2));
    });
    q.v = sample(g, [](double x1, double x2) { return 0.1 * std::cos(x1 + x2); });
    q.R = R;
    q.W = SkewMatrix(0.3, -0.2, 0.0);  // normal directions at this frame
    TotalVK t = total_vk(q, load, m, set);

    // independent re-quadrature of each load coupling
    Eigen::VectorXd w = quadrature_weights(g);
    Eigen::Matrix3d Wm = q.W.matrix();
    double lu = 0, lv = 0, lw2 = 0;
    for (int n = 0; n < g.size(); ++n) {
        int i = n % g.n1, j = n / g.n1;
        Eigen::Vector3d f = load.f.values.row(n);
        lu += w[n] * f.dot(R * Eigen::Vector3d(q.u.values(n, 0), q.u.values(n, 1), 0));
        lv += w[n] * f.dot(R * Wm * Eigen::Vector3d(0, 0, q.v.values[n]));
        lw2 += w[n] * f.dot(R * Wm * Wm * Eigen::Vector3d(g.x1(i), g.x2(j), 0));
    }
    CHECK(t.load_u == doctest::Approx(lu).epsilon(1e-12));
    CHECK(t.load_v == doctest::Approx(lv).epsilon(1e-12));
    CHECK(t.load_w2 == doctest::Approx(lw2).epsilon(1e-12));
    CHECK(t.load_w2 == doctest::Approx(evaluate_F(mm, R * Wm * Wm)).epsilon(1e-9));
    CHECK(t.value ==
          doctest::Approx(t.elastic.total - lu - lv - lw2).epsilon(1e-12));

    // W = 0 drops the last two couplings
    AdmissibleQuadruplet qw0 = q;
    qw0.W = SkewMatrix();
    TotalVK t0 = total_vk(qw0, load, m, set);
    CHECK(t0.load_v == 0.0);
    CHECK(t0.load_w2 == 0.0);
    CHECK(t0.value == doctest::Approx(t0.elastic.total - lu).epsilon(1e-12));

    // a tangent component of W is rejected
    AdmissibleQuadruplet bad = q;
    bad.W = SkewMatrix(0.0, 0.0, 0.5);
    CHECK_THROWS_AS(total_vk(bad, load, m, set), InputError);
    bad.W = SkewMatrix();
    bad.R = Eigen::Matrix3d::Identity();  // not optimal for this load
    CHECK_THROWS_AS(total_vk(bad, load, m, set), InputError);
}

TEST_CASE("total energy is gauge invariant at optimal frames") {
    Grid2D g = Grid2D::unit_square(65);
    ElasticModel m;
    Load load = example_load(g);
    OptimalRotationSet set = classify_optimal_set(load, moment_matrix(load));

    AdmissibleQuadruplet q;
    q.u = sample_vector(g, 2, [](double x1, double x2) {
        return Eigen::Vector2d(0.01 * std::sin(x1), 0.02 * x1 * x2);
    });
    q.v = sample(g, [](double x1, double x2) { return 0.05 * std::cos(2 * x1 - x2); });
    q.R = lifted_frame();
    q.W = SkewMatrix(0.2, 0.1, 0.0);
    double base = total_vk(q, load, m, set).value;

    // u -> u + (skew)x' + const, v -> v + const leave the value unchanged
    AdmissibleQuadruplet shifted = q;
    double s = 0.37, eta1 = -0.8, eta2 = 0.5, delta = 1.7;
    for (int n = 0; n < g.size(); ++n) {
        int i = n % g.n1, j = n / g.n1;
        shifted.u.values(n, 0) += s * g.x2(j) + eta1;
        shifted.u.values(n, 1) += -s * g.x1(i) + eta2;
        shifted.v.values[n] += delta;
    }
    CHECK(std::abs(total_vk(shifted, load, m, set).value - base) <= 1e-9);
}

TEST_CASE("total energy of surfaces") {
    Grid2D g = Grid2D::unit_square(65);
    ElasticModel m;
    Load load = example_load(g);
    OptimalRotationSet set = classify_optimal_set(load, moment_matrix(load));

    auto flat_at = [&](const Eigen::Matrix3d& R) {
        VectorField2D y = sample_vector(g, 3, [](double x1, double x2) {
            return Eigen::Vector3d(x1, x2, 0.0);
        });
        y.values = (R * y.values.transpose()).transpose();
        return y;
    };
    TotalKL opt = total_kl(flat_at(lifted_frame()), load, m);
    CHECK(opt.elastic == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(opt.value == doctest::Approx(-set.max_value).epsilon(1e-9));
    TotalKL off = total_kl(flat_at(Eigen::Matrix3d::Identity()), load, m);
    CHECK(off.value > opt.value - 1e-12);
    CHECK(off.value == doctest::Approx(0.0).epsilon(1e-9));  // F(Id) = 0 here
}

TEST_CASE("three-dimensional energy with rescaled gradient") {
    Grid2D g = Grid2D::unit_square(65);
    ElasticModel m;
    double h = 0.05;

    // rigid motion: exactly stress free
    Eigen::Matrix3d R = exp_skew(SkewMatrix(0.3, 0.7, -0.2));
    Field3D rigid(g, 9);
    for (int k = 0; k < 9; ++k)
        for (int n = 0; n < g.size(); ++n) {
            int i = n % g.n1, j = n / g.n1;
            Eigen::Vector3d p(g.x1(i), g.x2(j), h * rigid.x3(k));
            rigid.values.row(n + g.size() * k) = (R * p).transpose();
        }
    CHECK(energy_h3d(rigid, h, m) <= 1e-12);

    // constant transverse stretch
    Field3D stretch(g, 9);
    for (int k = 0; k < 9; ++k)
        for (int n = 0; n < g.size(); ++n) {
            int i = n % g.n1, j = n / g.n1;
            stretch.values.row(n + g.size() * k) =
                Eigen::RowVector3d(g.x1(i), g.x2(j), 2.0 * h * stretch.x3(k));
        }
    CHECK(energy_h3d(stretch, h, m) ==
          doctest::Approx(m.stored_density(Eigen::Vector3d(1, 1, 2).asDiagonal()))
              .epsilon(1e-12));

    // frame indifference on a curved sample
    ScalarField2D v = sample(g, [](double x1, double x2) {
        return std::sin(x1) + 0.3 * x2;
    });
    Field3D y = test_deformation_vk(Eigen::Matrix3d::Identity(), v, h);
    double e = energy_h3d(y, h, m);
    CHECK(e > 0.0);
    Eigen::Matrix3d Q = exp_skew(SkewMatrix(1.1, -0.4, 0.6));
    Field3D yq = y;
    yq.values = (Q * y.values.transpose()).transpose();
    CHECK(energy_h3d(yq, h, m) == doctest::Approx(e).epsilon(1e-12));

    // load coupling: rigid state at the optimal frame
    Load load = example_load(g);
    OptimalRotationSet set = classify_optimal_set(load, moment_matrix(load));
    Field3D flat(g, 9);
    for (int k = 0; k < 9; ++k)
        for (int n = 0; n < g.size(); ++n) {
            int i = n % g.n1, j = n / g.n1;
            Eigen::Vector3d p(g.x1(i), g.x2(j), h * flat.x3(k));
            flat.values.row(n + g.size() * k) = (lifted_frame() * p).transpose();
        }
    CHECK(total_h3d(flat, h, load, m) ==
          doctest::Approx(-h * h * set.max_value).epsilon(1e-9));
    Load none{VectorField2D(g, 3)};
    CHECK(total_h3d(y, h, none, m) == energy_h3d(y, h, m));
}

TEST_CASE("plate ansatz structure") {
    Grid2D g = Grid2D::unit_square(65);
    double h = 0.1;
    ScalarField2D v = sample(g, [](double x1, double x2) {
        return std::sin(x1) * std::cos(0.5 * x2);
    });
    Eigen::Matrix3d R = exp_skew(SkewMatrix(0.2, -0.5, 0.3));
    Field3D y = test_deformation_vk(R, v, h, 9);
    // mid plane: y = R(x', h v) exactly
    VectorField2D gv = gradient(v);
    for (int n = 0; n < g.size(); n += 113) {
        int i = n % g.n1, j = n / g.n1;
        Eigen::Vector3d mid(g.x1(i), g.x2(j), h * v.values[n]);
        CHECK((Eigen::Vector3d(y.values.row(y.row(i, j, 4))) - R * mid).norm() < 1e-14);
        // top face picks up the full transverse offset
        Eigen::Vector3d top(g.x1(i) - 0.5 * h * h * gv.values(n, 0),
                            g.x2(j) - 0.5 * h * h * gv.values(n, 1),
                            0.5 * h + h * v.values[n]);
        CHECK((Eigen::Vector3d(y.values.row(y.row(i, j, 8))) - R * top).norm() < 1e-14);
    }

    // v = 0 degenerates to a rigid motion
    ElasticModel m;
    Field3D rigid = test_deformation_vk(R, ScalarField2D(g), h);
    CHECK(energy_h3d(rigid, h, m) <= 1e-12);
}

TEST_CASE("surface ansatz structure and unit normals") {
    Grid2D g = Grid2D::unit_square(129);
    IsometricEmbedding emb = isometric_embedding(sample(g, [](double x1, double) {
        return 0.2 * std::sin(x1);
    }));
    Eigen::Matrix3d R = exp_skew(SkewMatrix(-0.3, 0.8, 0.1));
    double h = 0.05;
    Field3D y = test_deformation_kl(R, emb.y, h, 9);
    VectorField2D nu = normal_field(emb.y);
    for (int n = 0; n < g.size(); n += 211)
        CHECK(nu.values.row(n).norm() == doctest::Approx(1.0).epsilon(1e-5));
    for (int n = 0; n < g.size(); n += 211) {
        Eigen::Vector3d expect =
            R * (Eigen::Vector3d(emb.y.values.row(n)) +
                 h * 0.25 * Eigen::Vector3d(nu.values.row(n)));
        CHECK((Eigen::Vector3d(y.values.row(n + g.size() * 6)) - expect).norm() < 1e-13);
    }

    VectorField2D bad = emb.y;
    bad.values.col(0) *= 1.2;
    CHECK_THROWS_AS(test_deformation_kl(R, bad, h), NotAnIsometryError);
}

TEST_CASE("thickness scaling of the plate ansatz is quartic") {
    ElasticModel m;
    auto energy = [&](double h, int n) {
        Grid2D g = Grid2D::unit_square(n);
        ScalarField2D v = sample(g, [](double x1, double) { return std::sin(x1); });
        return energy_h3d(test_deformation_vk(Eigen::Matrix3d::Identity(), v, h), h, m);
    };
    ScalingStudy s = scaling_study(energy, {0.2, 0.1, 0.05, 0.02});
    CAPTURE(s.grid_n);
    CAPTURE(s.residual);
    CHECK(s.slope > 3.9);
    CHECK(s.slope < 4.1);
}

TEST_CASE("thickness scaling of the surface ansatz") {
    ElasticModel m;
    // amplitude fixed: energy is quadratic in h
    auto energy2 = [&](double h, int n) {
        Grid2D g = Grid2D::unit_square(n);
        IsometricEmbedding emb = isometric_embedding(sample(g, [](double x1, double) {
            return 0.2 * std::sin(x1);
        }));
        return energy_h3d(
            test_deformation_kl(Eigen::Matrix3d::Identity(), emb.y, h, 9, 1e-4), h, m);
    };
    ScalingStudy s2 = scaling_study(energy2, {0.2, 0.1, 0.05, 0.02});
    CAPTURE(s2.grid_n);
    CHECK(s2.slope > 1.9);
    CHECK(s2.slope < 2.1);

    // amplitude h^(-1) sqrt(d_h) with d_h = h^3: energy tracks d_h
    auto energy3 = [&](double h, int n) {
        Grid2D g = Grid2D::unit_square(n);
        double amp = std::sqrt(h);
        IsometricEmbedding emb = isometric_embedding(sample(g, [&](double x1, double) {
            return amp * std::sin(x1);
        }));
        return energy_h3d(
            test_deformation_kl(Eigen::Matrix3d::Identity(), emb.y, h, 9, 1e-4), h, m);
    };
    std::vector<double> hs = {0.04, 0.02, 0.01, 0.004};
    ScalingStudy s3 = scaling_study(energy3, hs);
    // slope of log E against log d_h = 3 log h is slope(h)/3
    CHECK(s3.slope / 3.0 > 0.9);
    CHECK(s3.slope / 3.0 < 1.1);
}

TEST_CASE("scaling study guards") {
    auto energy = [](double h, int) { return h * h; };
    CHECK_THROWS_AS(scaling_study(energy, {0.2, 0.1, 0.05}), InputError);
    CHECK_THROWS_AS(scaling_study(energy, {0.2, 0.15, 0.1, 0.05}), InputError);
    auto rigid = [](double, int) { return 1e-17; };
    CHECK_THROWS_AS(scaling_study(rigid, {0.2, 0.1, 0.05, 0.02}), DegenerateFitError);
    ScalingStudy s = scaling_study(energy, {0.2, 0.1, 0.05, 0.02});
    CHECK(s.slope == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(s.residual < 1e-10);
}

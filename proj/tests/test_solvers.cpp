#include "kgci/lp.hpp"
#include "kgci/qp.hpp"

#include <doctest.h>

#include <random>

using namespace Eigen;

TEST_CASE("QP solutions satisfy the KKT conditions") {
    std::mt19937 rng(11);
    std::normal_distribution<double> N;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 10, m = 4 + trial % 40;
        MatrixXd A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = N(rng);
        kgci::qp::Problem p;
        p.G = A * A.transpose() + 0.1 * MatrixXd::Identity(n, n);
        p.a = VectorXd(n);
        for (int i = 0; i < n; ++i) p.a(i) = 3.0 * N(rng);
        p.C = MatrixXd(m, n);
        p.b = VectorXd(m);
        VectorXd x0(n);
        for (int i = 0; i < n; ++i) x0(i) = N(rng);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) p.C(i, j) = N(rng);
            p.b(i) = p.C.row(i).dot(x0) - std::abs(N(rng));
        }
        const auto s = kgci::qp::solve(p);
        REQUIRE(s.status == kgci::qp::Status::Optimal);
        const VectorXd grad = p.G * s.x + p.a - p.C.transpose() * s.multipliers;
        CHECK(grad.norm() < 1e-8);
        CHECK((p.b - p.C * s.x).maxCoeff() < 1e-9);
        CHECK(s.multipliers.minCoeff() > -1e-10);
        for (int i = 0; i < m; ++i) CHECK(std::abs(s.multipliers(i) * (p.C.row(i).dot(s.x) - p.b(i))) < 1e-8);
        CHECK(s.objective == doctest::Approx(0.5 * s.x.dot(p.G * s.x) + p.a.dot(s.x)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("QP reports infeasible constraint sets") {
    kgci::qp::Problem p;
    p.G = MatrixXd::Identity(2, 2);
    p.a = VectorXd::Zero(2);
    p.C = MatrixXd(2, 2);
    p.C << 1, 0, -1, 0;
    p.b = Vector2d(1.0, 0.0);  // x0 >= 1 and x0 <= 0
    CHECK(kgci::qp::solve(p).status == kgci::qp::Status::Infeasible);
}

TEST_CASE("QP projection onto a half-plane") {
    // Closest point to (2, 2) with x + y <= 1 is (0.5, 0.5).
    kgci::qp::Problem p;
    p.G = MatrixXd::Identity(2, 2);
    p.a = Vector2d(-2.0, -2.0);
    p.C = MatrixXd(1, 2);
    p.C << -1, -1;
    p.b = VectorXd::Constant(1, -1.0);
    const auto s = kgci::qp::solve(p);
    CHECK(s.x(0) == doctest::Approx(0.5));
    CHECK(s.x(1) == doctest::Approx(0.5));
    CHECK(s.multipliers(0) == doctest::Approx(1.5));
}

TEST_CASE("LP textbook problem") {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18: optimum (2, 6), value 36.
    kgci::lp::Problem p;
    p.cost = Vector2d(-3.0, -5.0);
    p.A = MatrixXd(3, 2);
    p.A << 1, 0, 0, 2, 3, 2;
    p.b = Vector3d(4, 12, 18);
    p.sense.assign(3, kgci::lp::Sense::LessEqual);
    const auto s = kgci::lp::solve(p);
    REQUIRE(s.status == kgci::lp::Status::Optimal);
    CHECK(s.x(0) == doctest::Approx(2.0));
    CHECK(s.x(1) == doctest::Approx(6.0));
    CHECK(s.objective == doctest::Approx(-36.0));
}

TEST_CASE("LP with equality and lower bounds") {
    // min x + y s.t. x + 2y = 4, x >= 1: optimum (1, 1.5).
    kgci::lp::Problem p;
    p.cost = Vector2d(1.0, 1.0);
    p.A = MatrixXd(2, 2);
    p.A << 1, 2, 1, 0;
    p.b = Vector2d(4, 1);
    p.sense = {kgci::lp::Sense::Equal, kgci::lp::Sense::GreaterEqual};
    const auto s = kgci::lp::solve(p);
    REQUIRE(s.status == kgci::lp::Status::Optimal);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(s.x(1) == doctest::Approx(1.5));

    p.sense = {kgci::lp::Sense::Equal, kgci::lp::Sense::GreaterEqual};
    p.b = Vector2d(-1, 0);
    CHECK(kgci::lp::solve(p).status == kgci::lp::Status::Infeasible);
}

TEST_CASE("LP detects unboundedness") {
    kgci::lp::Problem p;
    p.cost = Vector2d(-1.0, 0.0);
    p.A = MatrixXd(1, 2);
    p.A << 0, 1;
    p.b = VectorXd::Constant(1, 3.0);
    p.sense = {kgci::lp::Sense::LessEqual};
    CHECK(kgci::lp::solve(p).status == kgci::lp::Status::Unbounded);
}

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pmpc/qp.hpp"

using namespace pmpc;

namespace {

QpForm box_qp(const Eigen::MatrixXd& Hess, const Eigen::VectorXd& lin,
              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const int d = static_cast<int>(lin.size());
    QpForm qp;
    qp.Hess = Hess;
    qp.lin = lin;
    qp.ineqA.resize(2 * d, d);
    qp.ineqA << Eigen::MatrixXd::Identity(d, d), -Eigen::MatrixXd::Identity(d, d);
    qp.ineqB.resize(2 * d);
    qp.ineqB << hi, -lo;
    return qp;
}

}  // namespace

TEST_CASE("unconstrained scalar minimum") {
    QpForm qp;
    qp.Hess = Eigen::MatrixXd::Identity(1, 1);
    qp.lin = Eigen::VectorXd::Constant(1, -2.0);
    qp.ineqA.resize(0, 1);
    qp.ineqB.resize(0);
    const QpSolution sol = solve_qp(qp);
    CHECK(sol.status == QpStatus::Optimal);
    CHECK(sol.u(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.value == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sol.kkt_residual <= 1e-9);
}

TEST_CASE("active constraint pins the minimizer") {
    // min u^2 subject to u >= 2.
    QpForm qp;
    qp.Hess = Eigen::MatrixXd::Identity(1, 1);
    qp.lin = Eigen::VectorXd::Zero(1);
    qp.ineqA = -Eigen::MatrixXd::Identity(1, 1);
    qp.ineqB = Eigen::VectorXd::Constant(1, -2.0);
    const QpSolution sol = solve_qp(qp);
    CHECK(sol.status == QpStatus::Optimal);
    CHECK(sol.u(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sol.dual(0) == doctest::Approx(4.0).epsilon(1e-9));  // 2Hu + lin + A'dual = 0
    CHECK(sol.kkt_residual <= 1e-9);
}

TEST_CASE("infeasible constraints are certified") {
    // u <= -1 and u >= 1.
    QpForm qp;
    qp.Hess = Eigen::MatrixXd::Identity(1, 1);
    qp.lin = Eigen::VectorXd::Zero(1);
    qp.ineqA.resize(2, 1);
    qp.ineqA << 1.0, -1.0;
    qp.ineqB.resize(2);
    qp.ineqB << -1.0, -1.0;
    CHECK(solve_qp(qp).status == QpStatus::Infeasible);

    // A constant (zero-row) contradiction: 0'u <= -1.
    QpForm qp0;
    qp0.Hess = Eigen::MatrixXd::Identity(2, 2);
    qp0.lin = Eigen::VectorXd::Zero(2);
    qp0.ineqA = Eigen::MatrixXd::Zero(1, 2);
    qp0.ineqB = Eigen::VectorXd::Constant(1, -1.0);
    CHECK(solve_qp(qp0).status == QpStatus::Infeasible);

    // Vacuous zero row: ignored.
    qp0.ineqB(0) = 1.0;
    const QpSolution ok = solve_qp(qp0);
    CHECK(ok.status == QpStatus::Optimal);
    CHECK(ok.u.isZero(1e-12));
}

TEST_CASE("degenerate duplicated constraints") {
    // Same face twice: the solver may activate either copy.
    QpForm qp;
    qp.Hess = Eigen::MatrixXd::Identity(2, 2);
    qp.lin = Eigen::VectorXd::Zero(2);
    qp.lin << -4.0, 0.0;
    qp.ineqA.resize(2, 2);
    qp.ineqA << 1.0, 0.0, 1.0, 0.0;
    qp.ineqB.resize(2);
    qp.ineqB << 1.0, 1.0;
    const QpSolution sol = solve_qp(qp);
    CHECK(sol.status == QpStatus::Optimal);
    CHECK(sol.u(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.kkt_residual <= 1e-9);
}

TEST_CASE("random box QPs match the projected-gradient oracle") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 5;
        Eigen::MatrixXd A(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) A(i, j) = unit(rng);
        }
        const Eigen::MatrixXd Hess =
            A.transpose() * A + 0.5 * Eigen::MatrixXd::Identity(d, d);
        Eigen::VectorXd lin(d), lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            lin(i) = 3.0 * unit(rng);
            const double a = unit(rng);
            const double b = unit(rng);
            lo(i) = std::min(a, b);
            hi(i) = std::max(a, b) + 0.1;
        }
        const QpForm qp = box_qp(Hess, lin, lo, hi);
        const QpSolution sol = solve_qp(qp);
        REQUIRE(sol.status == QpStatus::Optimal);
        CHECK(sol.kkt_residual <= 1e-9);

        const Eigen::VectorXd pg = oracle::projected_gradient_box_qp(Hess, lin, lo, hi);
        CHECK(std::abs(qp.objective(sol.u) - qp.objective(pg)) <=
              1e-5 * std::max(1.0, std::abs(qp.objective(pg))));
        CHECK((sol.u - pg).lpNorm<Eigen::Infinity>() <= 1e-5);
    }
}

TEST_CASE("solves are deterministic") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int d = 6;
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) A(i, j) = unit(rng);
    }
    QpForm qp = box_qp(A.transpose() * A + Eigen::MatrixXd::Identity(d, d),
                       Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return unit(rng); }),
                       Eigen::VectorXd::Constant(d, -0.2),
                       Eigen::VectorXd::Constant(d, 0.2));
    const QpSolution first = solve_qp(qp);
    REQUIRE(first.status == QpStatus::Optimal);
    for (int rep = 0; rep < 3; ++rep) {
        const QpSolution again = solve_qp(qp);
        CHECK((first.u - again.u).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(first.value == again.value);
        CHECK((first.dual - again.dual).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(first.iterations == again.iterations);
    }
}

TEST_CASE("general polytopic constraints") {
    // Minimize distance to (2, 2) over the triangle x1,x2 >= 0, x1 + x2 <= 1:
    // the optimum is the closest point on the hypotenuse, (0.5, 0.5).
    QpForm qp;
    qp.Hess = Eigen::MatrixXd::Identity(2, 2);
    qp.lin = Eigen::VectorXd(2);
    qp.lin << -4.0, -4.0;
    qp.const_term = 8.0;
    qp.ineqA.resize(3, 2);
    qp.ineqA << -1.0, 0.0, 0.0, -1.0, 1.0, 1.0;
    qp.ineqB.resize(3);
    qp.ineqB << 0.0, 0.0, 1.0;
    const QpSolution sol = solve_qp(qp);
    CHECK(sol.status == QpStatus::Optimal);
    CHECK(sol.u(0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(sol.u(1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(sol.kkt_residual <= 1e-9);
}

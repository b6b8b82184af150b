#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pmpc/errors.hpp"
#include "pmpc/synthesis.hpp"

using namespace pmpc;

namespace {

LinearDynamics double_integrator() {
    LinearDynamics lin;
    lin.A.resize(2, 2);
    lin.A << 1.0, 1.0, 0.0, 1.0;
    lin.B.resize(2, 1);
    lin.B << 0.5, 1.0;
    lin.Bw = Eigen::MatrixXd::Identity(2, 2);
    return lin;
}

CostWeights example_weights() {
    CostWeights weights;
    weights.Q.resize(2, 2);
    weights.Q << 10.0, 0.0, 0.0, 1.0;
    weights.R = Eigen::MatrixXd::Identity(1, 1);
    weights.S = Eigen::MatrixXd::Identity(2, 2);
    return weights;
}

LinearDynamics scalar_plant(double a, double b, double bw = 1.0) {
    LinearDynamics lin;
    lin.A = Eigen::MatrixXd::Constant(1, 1, a);
    lin.B = Eigen::MatrixXd::Constant(1, 1, b);
    lin.Bw = Eigen::MatrixXd::Constant(1, 1, bw);
    return lin;
}

CostWeights scalar_weights(double q = 1.0, double r = 1.0, double s = 1.0) {
    CostWeights weights;
    weights.Q = Eigen::MatrixXd::Constant(1, 1, q);
    weights.R = Eigen::MatrixXd::Constant(1, 1, r);
    weights.S = Eigen::MatrixXd::Constant(1, 1, s);
    return weights;
}

}  // namespace

TEST_CASE("gain synthesis stabilizes") {
    // Already-stable scalar plant.
    const Eigen::MatrixXd k0 = synthesize_gain(scalar_plant(0.5, 1.0), scalar_weights());
    CHECK(std::abs(0.5 + k0(0, 0)) < 1.0);

    // Running example with its stage weights.
    const Eigen::MatrixXd K = synthesize_gain(double_integrator(), example_weights());
    const LinearDynamics lin = double_integrator();
    CHECK(spectral_radius(lin.A + lin.B * K) < 1.0);

    // Unstable scalar plant: the gain must match the scalar Riccati fixed
    // point, located independently by grid search on the residual.
    const Eigen::MatrixXd k2 = synthesize_gain(scalar_plant(2.0, 1.0), scalar_weights());
    double best_p = 0.0;
    double best_res = std::numeric_limits<double>::infinity();
    for (double p = 1.0; p < 50.0; p += 1e-4) {
        // p = q + a^2 p - a^2 p^2 / (r + p) with a = 2, q = r = 1.
        const double res = std::abs(1.0 + 4.0 * p - 4.0 * p * p / (1.0 + p) - p);
        if (res < best_res) {
            best_res = res;
            best_p = p;
        }
    }
    const double k_oracle = -(2.0 * best_p) / (1.0 + best_p);
    CHECK(k2(0, 0) == doctest::Approx(k_oracle).epsilon(1e-3));
    CHECK(std::abs(2.0 + k2(0, 0)) < 1.0);
}

TEST_CASE("unstabilizable pairs are rejected") {
    CHECK_THROWS_AS(synthesize_gain(scalar_plant(2.0, 0.0), scalar_weights()),
                    SynthesisError);
    LinearDynamics lin;
    lin.A = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    lin.B = Eigen::MatrixXd::Zero(2, 1);
    lin.Bw = Eigen::MatrixXd::Identity(2, 2);
    CostWeights weights = example_weights();
    CHECK_THROWS_AS(synthesize_gain(lin, weights), SynthesisError);
}

TEST_CASE("terminal weight solves the fixed point") {
    // Nilpotent closed loop: P is the constant term.
    LinearDynamics lin = scalar_plant(1.0, 1.0);
    const Eigen::MatrixXd K = Eigen::MatrixXd::Constant(1, 1, -1.0);  // Ak = 0
    const Eigen::MatrixXd delta = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::MatrixXd P =
        solve_terminal_weight(lin, K, scalar_weights(), delta, 2.0);
    // Q + K'RK + lambda*Delta = 1 + 1 + 2 = 4.
    CHECK(P(0, 0) == doctest::Approx(4.0).epsilon(1e-12));

    // Scalar Ak = 0.5 with unit forcing term: geometric series 1/(1-0.25).
    LinearDynamics lin2 = scalar_plant(0.5, 1.0);
    const Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(1, 1);
    CostWeights w2 = scalar_weights(0.5, 1.0);  // Q + K'RK + lambda*Delta = 1 total
    const Eigen::MatrixXd delta_half = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const Eigen::MatrixXd P2 = solve_terminal_weight(lin2, K0, w2, delta_half, 1.0);
    CHECK(P2(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("vectorized and series Lyapunov solutions agree") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coeff(-0.4, 0.4);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd Ak(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) Ak(i, j) = coeff(rng);
        }
        if (spectral_radius(Ak) >= 0.95) continue;

        LinearDynamics lin;
        lin.A = Ak;
        lin.B = Eigen::MatrixXd::Zero(n, 1);
        lin.Bw = Eigen::MatrixXd::Identity(n, n);
        CostWeights weights;
        weights.Q = Eigen::MatrixXd::Identity(n, n);
        weights.R = Eigen::MatrixXd::Identity(1, 1);
        weights.S = Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd K = Eigen::MatrixXd::Zero(1, n);
        const Eigen::MatrixXd delta = 0.5 * Eigen::MatrixXd::Identity(n, n);
        const double lambda = 1.5;

        const Eigen::MatrixXd P = solve_terminal_weight(lin, K, weights, delta, lambda);
        const Eigen::MatrixXd M = weights.Q + lambda * delta;
        const Eigen::MatrixXd P_series = oracle::lyapunov_by_series(Ak, M);
        CHECK((P - P_series).norm() <= 1e-10 * std::max(1.0, P.norm()));
    }
}

TEST_CASE("example terminal weight satisfies the decrease condition with margin") {
    const LinearDynamics lin = double_integrator();
    const CostWeights weights = example_weights();
    const Eigen::MatrixXd K = synthesize_gain(lin, weights);
    const Eigen::MatrixXd delta = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd P = solve_terminal_weight(lin, K, weights, delta, 2.0);

    const Eigen::MatrixXd Ak = lin.A + lin.B * K;
    const Eigen::MatrixXd residual =
        P - Ak.transpose() * P * Ak - (weights.Q + K.transpose() * weights.R * K) - delta;
    // Residual is (lambda - 1) Delta = I, so its smallest eigenvalue is 1.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(residual);
    CHECK(es.eigenvalues().minCoeff() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("scalar terminal set matches the closed-form fixed point") {
    // Ak = 0.5, X = [-1, 1], W = [-0.1, 0.1]: an interval [-c, c] is robustly
    // invariant iff 0.5 c + 0.1 <= c, i.e. c >= 0.2, so the maximal invariant
    // subset of X is X itself (0.5 * 1 + 0.1 = 0.6 <= 1).
    LinearDynamics lin = scalar_plant(0.5, 1.0);
    const Eigen::MatrixXd K = Eigen::MatrixXd::Zero(1, 1);
    const HPolytope X = HPolytope::cube(1, 1.0);
    const HPolytope U = HPolytope::cube(1, 10.0);
    const HPolytope W = HPolytope::cube(1, 0.1);
    const HPolytope Xf = compute_terminal_set(lin, K, X, U, W);
    CHECK(support(Xf, Eigen::VectorXd::Ones(1)).value ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(support(Xf, (-Eigen::VectorXd::Ones(1)).eval()).value ==
          doctest::Approx(1.0).epsilon(1e-9));

    // Shrinking the state box below the minimal invariant radius leaves no
    // robust terminal set: c <= 0.15 < 0.2 cannot absorb the disturbance.
    const HPolytope tight = HPolytope::cube(1, 0.15);
    CHECK_THROWS_AS(compute_terminal_set(lin, K, tight, U, W), SynthesisError);
}

TEST_CASE("zero disturbance keeps an invariant seed unchanged") {
    // Contractive diagonal map on a box: the seed is already invariant.
    LinearDynamics lin;
    lin.A = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    lin.B = Eigen::MatrixXd::Zero(2, 1);
    lin.B(1, 0) = 1.0;
    lin.Bw = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd K = Eigen::MatrixXd::Zero(1, 2);
    const HPolytope X = HPolytope::cube(2, 1.0);
    const HPolytope U = HPolytope::cube(1, 1.0);
    const HPolytope Xf = compute_terminal_set(lin, K, X, U, HPolytope::origin(2));
    CHECK(contains(Xf, X));
    CHECK(contains(X, Xf));
}

TEST_CASE("running example terminal set is valid") {
    const LinearDynamics lin = double_integrator();
    const CostWeights weights = example_weights();
    const Eigen::MatrixXd K = synthesize_gain(lin, weights);
    const HPolytope X = HPolytope::cube(2, 1.0);
    const HPolytope U = HPolytope::cube(1, 1.0);
    const HPolytope W = HPolytope::cube(2, 0.1);

    const HPolytope Xf = compute_terminal_set(lin, K, X, U, W);
    CHECK_FALSE(is_empty(Xf));
    CHECK(contains(X, Xf));

    TerminalIngredients ing;
    ing.K = K;
    ing.Delta = Eigen::MatrixXd::Identity(2, 2);
    ing.lambda = 2.0;
    ing.P = solve_terminal_weight(lin, K, weights, ing.Delta, ing.lambda);
    ing.Xf = Xf;
    const CertificateReport cert = verify_assumption_margins(ing, lin, weights, X, U, W);
    CHECK(cert.certified);
    CHECK(cert.decrease_residual_eigmin >= -1e-8);
    CHECK(cert.rpi_margin >= -1e-8);
    CHECK(cert.state_margin >= -1e-8);
    CHECK(cert.input_margin >= -1e-8);

    // Invariance restated pointwise: every swept boundary point of Xf maps
    // back into Xf under every disturbance bounding-box vertex.
    const Eigen::MatrixXd Ak = lin.A + lin.B * K;
    const auto boundary = boundary_2d(Xf);
    const auto w_vertices = bounding_box_vertices(W);
    REQUIRE_FALSE(boundary.empty());
    for (const auto& x : boundary) {
        for (const auto& w : w_vertices) {
            CHECK(Xf.contains_point(Ak * x + lin.Bw * w, 1e-8));
        }
    }

    // Quadratic decrease inside Xf: Vf(Ak x) - Vf(x) <= -x'(Q + K'RK + Delta)x.
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int tested = 0;
    while (tested < 1000) {
        const Eigen::Vector2d x(unit(rng), unit(rng));
        if (!Xf.contains_point(x)) continue;
        ++tested;
        const Eigen::VectorXd u = K * x;
        const Eigen::Vector2d next = Ak * x;
        const double decrease = next.dot(ing.P * next) - x.dot(ing.P * x);
        const double bound = -x.dot(weights.Q * x) - u.dot(weights.R * u) -
                             x.dot(ing.Delta * x);
        CHECK(decrease <= bound + 1e-8);
    }
}

TEST_CASE("terminal set shrinks when the disturbance grows") {
    const LinearDynamics lin = double_integrator();
    const Eigen::MatrixXd K = synthesize_gain(lin, example_weights());
    const HPolytope X = HPolytope::cube(2, 1.0);
    const HPolytope U = HPolytope::cube(1, 1.0);
    const HPolytope small = compute_terminal_set(lin, K, X, U, HPolytope::cube(2, 0.1));
    const HPolytope large = compute_terminal_set(lin, K, X, U, HPolytope::cube(2, 0.11));
    CHECK(contains(small, large));
}

TEST_CASE("destabilizing gain fails certification") {
    LinearDynamics lin = scalar_plant(1.0, 1.0);
    TerminalIngredients ing;
    ing.K = Eigen::MatrixXd::Constant(1, 1, 0.5);  // Ak = 1.5
    ing.P = Eigen::MatrixXd::Identity(1, 1);
    ing.Delta = Eigen::MatrixXd::Identity(1, 1);
    ing.lambda = 1.0;
    ing.Xf = HPolytope::cube(1, 0.5);
    const CertificateReport cert = verify_assumption_margins(
        ing, lin, scalar_weights(), HPolytope::cube(1, 1.0), HPolytope::cube(1, 1.0),
        HPolytope::cube(1, 0.1));
    CHECK_FALSE(cert.certified);
    CHECK(cert.rpi_margin < 0.0);
}

TEST_CASE("boundary-case decrease residual at lambda = 1") {
    const LinearDynamics lin = double_integrator();
    const CostWeights weights = example_weights();
    const Eigen::MatrixXd K = synthesize_gain(lin, weights);
    TerminalIngredients ing;
    ing.K = K;
    ing.Delta = Eigen::MatrixXd::Identity(2, 2);
    ing.lambda = 1.0;
    ing.P = solve_terminal_weight(lin, K, weights, ing.Delta, ing.lambda);
    ing.Xf = compute_terminal_set(lin, K, HPolytope::cube(2, 1.0), HPolytope::cube(1, 1.0),
                                  HPolytope::cube(2, 0.1));
    const CertificateReport cert = verify_assumption_margins(
        ing, lin, weights, HPolytope::cube(2, 1.0), HPolytope::cube(1, 1.0),
        HPolytope::cube(2, 0.1));
    // Residual (lambda - 1) Delta = 0: right at the certification boundary.
    CHECK(cert.decrease_residual_eigmin == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(cert.certified);
}

TEST_CASE("ultimate-bound level set") {
    const LinearDynamics lin = scalar_plant(0.5, 1.0);
    const CostWeights weights = scalar_weights();
    const Eigen::MatrixXd K = Eigen::MatrixXd::Zero(1, 1);
    TerminalIngredients ing;
    ing.K = K;
    ing.Delta = Eigen::MatrixXd::Identity(1, 1);
    ing.lambda = 2.0;
    ing.P = solve_terminal_weight(lin, K, weights, ing.Delta, ing.lambda);
    ing.Xf = compute_terminal_set(lin, K, HPolytope::cube(1, 1.0), HPolytope::cube(1, 10.0),
                                  HPolytope::cube(1, 0.1));

    // W = {0} gives beta = 0.
    CHECK(iss_level_set(ing, lin, weights, HPolytope::origin(1)).beta ==
          doctest::Approx(0.0));

    // Doubling the disturbance radius quadruples beta.
    const double beta1 = iss_level_set(ing, lin, weights, HPolytope::cube(1, 0.1)).beta;
    const double beta2 = iss_level_set(ing, lin, weights, HPolytope::cube(1, 0.2)).beta;
    CHECK(beta1 > 0.0);
    CHECK(beta2 == doctest::Approx(4.0 * beta1).epsilon(1e-12));

    // Monte-Carlo containment: terminal-loop trajectories from Xf stay inside
    // the slightly inflated level set after burn-in.
    const IssLevelSet level = iss_level_set(ing, lin, weights, HPolytope::cube(1, 0.1));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> w_draw(-0.1, 0.1);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.2);
    REQUIRE(ing.Xf.contains_point(x));
    const Eigen::MatrixXd Ak = lin.A + lin.B * K;
    int checked = 0;
    for (int t = 0; t < 10000; ++t) {
        x = Ak * x + lin.Bw * Eigen::VectorXd::Constant(1, w_draw(rng));
        if (t >= 100) {
            CHECK(level.contains(x, 0.05));
            ++checked;
        }
    }
    CHECK(checked == 9900);
}

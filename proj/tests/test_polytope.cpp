#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pmpc/polytope.hpp"

using namespace pmpc;

namespace {

HPolytope triangle() {
    Eigen::MatrixXd H(3, 2);
    H << -1.0, 0.0, 0.0, -1.0, 1.0, 1.0;
    Eigen::VectorXd g(3);
    g << 0.0, 0.0, 1.0;
    return HPolytope::from_inequalities(H, g);
}

}  // namespace

TEST_CASE("support values on boxes") {
    const HPolytope box = HPolytope::cube(2, 1.0);
    Eigen::Vector2d dir(1.0, 0.0);
    CHECK(support(box, dir).value == doctest::Approx(1.0).epsilon(1e-12));

    // Disturbance-sized box, diagonal direction: supports add per coordinate.
    const HPolytope w_box = HPolytope::cube(2, 0.1);
    dir << 1.0, 1.0;
    CHECK(support(w_box, dir).value == doctest::Approx(0.2).epsilon(1e-12));

    CHECK(support(triangle(), dir).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("support is positively homogeneous") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const HPolytope set = triangle();
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd dir(2);
        dir << coeff(rng), coeff(rng);
        const double alpha = 0.1 + 3.0 * std::abs(coeff(rng));
        const SupportResult base = support(set, dir);
        const SupportResult scaled = support(set, (alpha * dir).eval());
        REQUIRE(base.status == LpStatus::Optimal);
        CHECK(scaled.value == doctest::Approx(alpha * base.value).epsilon(1e-9));
    }
}

TEST_CASE("pontryagin difference of boxes matches interval arithmetic") {
    const HPolytope state = HPolytope::cube(2, 1.0);
    const HPolytope dist = HPolytope::cube(2, 0.1);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);

    const HPolytope eroded = pontryagin_difference(state, dist, eye);
    CHECK_FALSE(eroded.known_empty());
    const auto expected = oracle::box_erosion(
        Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0),
        Eigen::VectorXd::Constant(2, -0.1), Eigen::VectorXd::Constant(2, 0.1));
    REQUIRE(expected.has_value());
    const HPolytope oracle_box = HPolytope::box(expected->first, expected->second);
    CHECK(contains(eroded, oracle_box));
    CHECK(contains(oracle_box, eroded));

    // Erosion by the singleton {0} is the identity.
    const HPolytope same = pontryagin_difference(state, HPolytope::origin(2), eye);
    CHECK(contains(same, state));
    CHECK(contains(state, same));

    // Eroding a small box by a bigger one is empty.
    const HPolytope tiny = HPolytope::cube(2, 0.05);
    CHECK(pontryagin_difference(tiny, dist, eye).known_empty());
}

TEST_CASE("erosion followed by re-addition stays inside the original") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> radius(0.2, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 2);
        const HPolytope set = HPolytope::cube(d, radius(rng));
        const HPolytope sub = HPolytope::cube(d, 0.3 * radius(rng));
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
        const HPolytope eroded = pontryagin_difference(set, sub, eye);
        if (eroded.known_empty()) continue;
        // h_{eroded + sub}(dir) = h_eroded(dir) + h_sub(dir) per row of `set`.
        for (int i = 0; i < set.num_rows(); ++i) {
            const Eigen::VectorXd dir = set.H().row(i).transpose();
            const double lhs = support(eroded, dir).value + support(sub, dir).value;
            CHECK(lhs <= set.g()(i) + 1e-9);
        }
    }
}

TEST_CASE("intersect boxes") {
    const HPolytope box = HPolytope::cube(2, 1.0);
    const HPolytope same = intersect(box, box);
    CHECK(same.num_rows() == box.num_rows());
    CHECK(contains(same, box));
    CHECK(contains(box, same));

    Eigen::MatrixXd H(1, 2);
    H << 1.0, 0.0;
    Eigen::VectorXd g(1);
    g << 0.5;
    const HPolytope halved = intersect(box, HPolytope::from_inequalities(H, g));
    CHECK(support(halved, Eigen::Vector2d(1.0, 0.0)).value ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(support(halved, Eigen::Vector2d(-1.0, 0.0)).value ==
          doctest::Approx(1.0).epsilon(1e-9));

    Eigen::VectorXd lo(2), hi(2);
    lo << 2.0, 2.0;
    hi << 3.0, 3.0;
    const HPolytope disjoint = intersect(box, HPolytope::box(lo, hi));
    CHECK(disjoint.known_empty());
}

TEST_CASE("affine preimage") {
    const HPolytope box = HPolytope::cube(2, 1.0);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);

    const HPolytope same = affine_preimage(box, eye);
    CHECK(contains(same, box));
    CHECK(contains(box, same));

    // Doubling map halves the preimage box.
    const HPolytope halved = affine_preimage(box, (2.0 * eye).eval());
    const HPolytope expected = HPolytope::cube(2, 0.5);
    CHECK(contains(halved, expected));
    CHECK(contains(expected, halved));

    // Zero map with positive offsets: every constraint is vacuous, the
    // preimage is the whole space and in particular unbounded.
    const HPolytope whole = affine_preimage(box, (0.0 * eye).eval());
    CHECK(whole.num_rows() == 0);
    CHECK_FALSE(is_empty(whole));
    CHECK_FALSE(is_bounded(whole));
}

TEST_CASE("redundancy removal") {
    // x1 <= 1 dominates x1 <= 2.
    Eigen::MatrixXd H(4, 2);
    H << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
    Eigen::VectorXd g(4);
    g << 1.0, 2.0, 1.0, 1.0;
    const HPolytope reduced = remove_redundancy(HPolytope::from_inequalities(H, g));
    CHECK(reduced.num_rows() == 3);
    CHECK(support(reduced, Eigen::Vector2d(1.0, 0.0)).value ==
          doctest::Approx(1.0).epsilon(1e-9));

    const HPolytope box = HPolytope::cube(3, 1.0);
    const HPolytope box_reduced = remove_redundancy(box);
    CHECK(box_reduced.num_rows() == box.num_rows());

    // Duplicated rows keep one copy.
    Eigen::MatrixXd Hdup(6, 2);
    Hdup << 1, 0, 0, 1, -1, 0, 0, -1, 1, 0, 1, 0;
    Eigen::VectorXd gdup(6);
    gdup << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
    const HPolytope dedup = remove_redundancy(HPolytope::from_inequalities(Hdup, gdup));
    CHECK(dedup.num_rows() == 4);
}

TEST_CASE("redundancy removal is idempotent and set-preserving") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::MatrixXd H(8, 2);
        Eigen::VectorXd g(8);
        H.topRows(4) << 1, 0, 0, 1, -1, 0, 0, -1;
        g.head(4).setOnes();
        for (int i = 4; i < 8; ++i) {
            H(i, 0) = coeff(rng);
            H(i, 1) = coeff(rng);
            if (H.row(i).norm() < 0.1) H(i, 0) += 0.5;
            g(i) = 0.2 + std::abs(coeff(rng));
        }
        const HPolytope set = HPolytope::from_inequalities(H, g);
        const HPolytope once = remove_redundancy(set);
        const HPolytope twice = remove_redundancy(once);
        CHECK(once.num_rows() == twice.num_rows());
        CHECK(contains(once, set));
        CHECK(contains(set, once));
    }
}

TEST_CASE("containment checks") {
    CHECK(contains(HPolytope::cube(2, 1.0), HPolytope::cube(2, 0.9)));
    CHECK_FALSE(contains(HPolytope::cube(2, 0.9), HPolytope::cube(2, 1.0)));
    // The empty set is inside everything.
    HPolytope empty = intersect(HPolytope::cube(2, 0.1),
                                HPolytope::box(Eigen::Vector2d(2.0, 2.0),
                                               Eigen::Vector2d(3.0, 3.0)));
    CHECK(contains(HPolytope::cube(2, 0.1), empty));
}

TEST_CASE("2-D boundary sweep walks the box corners") {
    const HPolytope box = HPolytope::cube(2, 1.0);
    const auto boundary = boundary_2d(box, 1.0);
    REQUIRE_FALSE(boundary.empty());
    for (const auto& v : boundary) {
        CHECK(box.contains_point(v, 1e-9));
        CHECK(v.lpNorm<Eigen::Infinity>() == doctest::Approx(1.0).epsilon(1e-9));
    }
    // All four corners appear in the sweep.
    for (const double sx : {-1.0, 1.0}) {
        for (const double sy : {-1.0, 1.0}) {
            bool found = false;
            for (const auto& v : boundary) {
                if ((v - Eigen::Vector2d(sx, sy)).norm() < 1e-7) found = true;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("bounding radius") {
    CHECK(bounding_radius(HPolytope::cube(2, 0.1)) ==
          doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    CHECK(bounding_radius(HPolytope::origin(2)) == doctest::Approx(0.0));
    CHECK(bounding_box_vertices(HPolytope::cube(2, 0.1)).size() == 4);
}

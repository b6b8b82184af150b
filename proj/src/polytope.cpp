#include "pmpc/polytope.hpp"

#include <cmath>
#include <numbers>

#include "pmpc/errors.hpp"

namespace pmpc {

namespace {
constexpr double kTol = 1e-9;
constexpr double kZeroRowTol = 1e-14;
}  // namespace

HPolytope HPolytope::from_inequalities(Eigen::MatrixXd H, Eigen::VectorXd g) {
    if (H.rows() != g.size()) {
        throw ContractViolation("HPolytope: H rows and g length differ");
    }
    HPolytope poly;
    poly.dim_ = static_cast<int>(H.cols());

    std::vector<int> keep;
    keep.reserve(static_cast<size_t>(H.rows()));
    for (int i = 0; i < H.rows(); ++i) {
        const double norm = H.row(i).norm();
        if (norm < kZeroRowTol) {
            // 0'x <= g_i: vacuous if g_i >= 0, unsatisfiable otherwise.
            if (g(i) < -kTol) poly.empty_flag_ = true;
            continue;
        }
        H.row(i) /= norm;
        g(i) /= norm;
        keep.push_back(i);
    }
    poly.H_.resize(static_cast<Eigen::Index>(keep.size()), H.cols());
    poly.g_.resize(static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) {
        poly.H_.row(static_cast<Eigen::Index>(k)) = H.row(keep[k]);
        poly.g_(static_cast<Eigen::Index>(k)) = g(keep[k]);
    }
    return poly;
}

HPolytope HPolytope::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (lo.size() != hi.size()) {
        throw ContractViolation("HPolytope::box: lo/hi length mismatch");
    }
    const int d = static_cast<int>(lo.size());
    Eigen::MatrixXd H(2 * d, d);
    Eigen::VectorXd g(2 * d);
    H.topRows(d) = Eigen::MatrixXd::Identity(d, d);
    H.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
    g.head(d) = hi;
    g.tail(d) = -lo;
    return from_inequalities(std::move(H), std::move(g));
}

HPolytope HPolytope::cube(int dim, double radius) {
    return box(Eigen::VectorXd::Constant(dim, -radius),
               Eigen::VectorXd::Constant(dim, radius));
}

HPolytope HPolytope::origin(int dim) { return cube(dim, 0.0); }

bool HPolytope::contains_point(const Eigen::VectorXd& x, double tol) const {
    if (x.size() != dim_) {
        throw ContractViolation("contains_point: dimension mismatch");
    }
    if (empty_flag_) return false;
    if (H_.rows() == 0) return true;
    return ((H_ * x - g_).array() <= tol).all();
}

SupportResult support(const HPolytope& set, const Eigen::VectorXd& dir) {
    if (dir.size() != set.ambient_dimension()) {
        throw ContractViolation("support: direction dimension mismatch");
    }
    SupportResult res;
    if (set.known_empty()) return res;
    const LpSolution lp = solve_lp(dir, set.H(), set.g());
    res.status = lp.status;
    res.value = lp.value;
    res.maximizer = lp.x;
    return res;
}

bool is_empty(const HPolytope& set) {
    if (set.known_empty()) return true;
    if (set.num_rows() == 0) return false;
    const LpSolution lp =
        solve_lp(Eigen::VectorXd::Zero(set.ambient_dimension()), set.H(), set.g());
    return lp.status == LpStatus::Infeasible;
}

bool is_bounded(const HPolytope& set) {
    if (set.known_empty()) return true;
    const int d = set.ambient_dimension();
    for (int j = 0; j < d; ++j) {
        for (const double sign : {1.0, -1.0}) {
            Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
            dir(j) = sign;
            const SupportResult s = support(set, dir);
            if (s.status == LpStatus::Unbounded) return false;
            if (s.status == LpStatus::Infeasible) return true;
        }
    }
    return true;
}

HPolytope pontryagin_difference(const HPolytope& set, const HPolytope& sub,
                                const Eigen::MatrixXd& map) {
    if (map.rows() != set.ambient_dimension() ||
        map.cols() != sub.ambient_dimension()) {
        throw ContractViolation("pontryagin_difference: map dimension mismatch");
    }
    Eigen::VectorXd g = set.g();
    for (int i = 0; i < set.num_rows(); ++i) {
        const Eigen::VectorXd dir = map.transpose() * set.H().row(i).transpose();
        const SupportResult s = support(sub, dir);
        if (s.status == LpStatus::Unbounded) {
            throw ContractViolation("pontryagin_difference: subtrahend unbounded");
        }
        if (s.status == LpStatus::Infeasible) {
            throw ContractViolation("pontryagin_difference: subtrahend empty");
        }
        g(i) -= s.value;
    }
    HPolytope result = HPolytope::from_inequalities(set.H(), g);
    if (is_empty(result)) result.mark_empty();
    return result;
}

HPolytope intersect(const HPolytope& a, const HPolytope& b) {
    if (a.ambient_dimension() != b.ambient_dimension()) {
        throw ContractViolation("intersect: ambient dimension mismatch");
    }
    Eigen::MatrixXd H(a.num_rows() + b.num_rows(), a.ambient_dimension());
    Eigen::VectorXd g(a.num_rows() + b.num_rows());
    H << a.H(), b.H();
    g << a.g(), b.g();
    HPolytope stacked = HPolytope::from_inequalities(std::move(H), std::move(g));
    if (a.known_empty() || b.known_empty()) stacked.mark_empty();
    return remove_redundancy(stacked);
}

HPolytope affine_preimage(const HPolytope& set, const Eigen::MatrixXd& M) {
    if (M.rows() != set.ambient_dimension()) {
        throw ContractViolation("affine_preimage: map row count mismatch");
    }
    HPolytope result = HPolytope::from_inequalities(set.H() * M, set.g());
    if (set.known_empty()) result.mark_empty();
    return result;
}

HPolytope remove_redundancy(const HPolytope& set) {
    if (set.known_empty() || is_empty(set)) {
        HPolytope copy = set;
        return copy.mark_empty();
    }
    if (set.num_rows() <= 1) return set;

    // Relax row i by 1 (rows have unit norm, so this is a unit of slack) and
    // maximize its normal direction over the relaxed set: a value at most
    // g_i + 1e-9 certifies that dropping the row changes nothing.
    Eigen::MatrixXd H = set.H();
    Eigen::VectorXd g = set.g();
    std::vector<bool> kept(static_cast<size_t>(H.rows()), true);
    int n_kept = static_cast<int>(H.rows());

    for (int i = 0; i < H.rows(); ++i) {
        if (n_kept == 1) break;
        Eigen::MatrixXd Hsub(n_kept, H.cols());
        Eigen::VectorXd gsub(n_kept);
        int r = 0;
        int row_i = -1;
        for (int k = 0; k < H.rows(); ++k) {
            if (!kept[static_cast<size_t>(k)]) continue;
            Hsub.row(r) = H.row(k);
            gsub(r) = g(k);
            if (k == i) row_i = r;
            ++r;
        }
        if (row_i < 0) continue;  // already dropped
        gsub(row_i) += 1.0;
        const LpSolution lp = solve_lp(H.row(i).transpose(), Hsub, gsub);
        if (lp.status == LpStatus::Optimal && lp.value <= g(i) + kTol) {
            kept[static_cast<size_t>(i)] = false;
            --n_kept;
        }
    }

    Eigen::MatrixXd Hout(n_kept, H.cols());
    Eigen::VectorXd gout(n_kept);
    int r = 0;
    for (int k = 0; k < H.rows(); ++k) {
        if (!kept[static_cast<size_t>(k)]) continue;
        Hout.row(r) = H.row(k);
        gout(r) = g(k);
        ++r;
    }
    return HPolytope::from_inequalities(std::move(Hout), std::move(gout));
}

bool contains(const HPolytope& a, const HPolytope& b, double tol) {
    if (a.ambient_dimension() != b.ambient_dimension()) {
        throw ContractViolation("contains: ambient dimension mismatch");
    }
    if (b.known_empty() || is_empty(b)) return true;
    for (int i = 0; i < a.num_rows(); ++i) {
        const SupportResult s = support(b, a.H().row(i).transpose());
        if (s.status == LpStatus::Unbounded) return false;
        if (s.value > a.g()(i) + tol) return false;
    }
    return true;
}

std::vector<Eigen::Vector2d> boundary_2d(const HPolytope& set, double step_deg) {
    if (set.ambient_dimension() != 2) {
        throw ContractViolation("boundary_2d: 2-D sets only");
    }
    std::vector<Eigen::Vector2d> points;
    if (set.known_empty()) return points;
    const int steps = static_cast<int>(std::lround(360.0 / step_deg));
    for (int k = 0; k < steps; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / steps;
        const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
        const SupportResult s = support(set, dir);
        if (s.status != LpStatus::Optimal) return {};
        const Eigen::Vector2d v = s.maximizer;
        if (points.empty() || (points.back() - v).norm() > kTol) {
            points.push_back(v);
        }
    }
    if (points.size() > 1 && (points.front() - points.back()).norm() <= kTol) {
        points.pop_back();
    }
    return points;
}

double bounding_radius(const HPolytope& set) {
    if (set.known_empty()) return 0.0;
    const int d = set.ambient_dimension();
    double sum_sq = 0.0;
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
        dir(j) = 1.0;
        const SupportResult hi = support(set, dir);
        dir(j) = -1.0;
        const SupportResult lo = support(set, dir);
        if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
            throw ContractViolation("bounding_radius: set must be nonempty and bounded");
        }
        sum_sq += std::pow(std::max(std::abs(hi.value), std::abs(lo.value)), 2);
    }
    return std::sqrt(sum_sq);
}

std::vector<Eigen::VectorXd> bounding_box_vertices(const HPolytope& set) {
    const int d = set.ambient_dimension();
    Eigen::VectorXd lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
        dir(j) = 1.0;
        const SupportResult shi = support(set, dir);
        dir(j) = -1.0;
        const SupportResult slo = support(set, dir);
        if (shi.status != LpStatus::Optimal || slo.status != LpStatus::Optimal) {
            throw ContractViolation("bounding_box_vertices: set must be nonempty and bounded");
        }
        hi(j) = shi.value;
        lo(j) = -slo.value;
    }
    std::vector<Eigen::VectorXd> vertices;
    vertices.reserve(static_cast<size_t>(1) << d);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) v(j) = (mask & (1u << j)) ? hi(j) : lo(j);
        vertices.push_back(std::move(v));
    }
    return vertices;
}

}  // namespace pmpc

#include "pmpc/lp.hpp"

#include <limits>
#include <vector>

#include "pmpc/errors.hpp"

namespace pmpc {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Dense tableau over the standard form
//   min f'z  s.t.  T z = rhs,  z >= 0,  rhs >= 0,
// with the variable layout [x+ (d) | x- (d) | slacks (p) | artificials].
// Rows whose original right-hand side was negative are stored negated, so the
// slack enters with coefficient -1 there and an artificial carries the basis.
struct Tableau {
    Eigen::MatrixXd T;
    Eigen::VectorXd rhs;
    std::vector<int> basis;       // basic variable per row
    std::vector<bool> blocked;    // columns excluded from pricing (artificials in phase 2)

    int rows() const { return static_cast<int>(T.rows()); }
    int cols() const { return static_cast<int>(T.cols()); }

    void pivot(int row, int col) {
        const double piv = T(row, col);
        T.row(row) /= piv;
        rhs(row) /= piv;
        for (int i = 0; i < rows(); ++i) {
            if (i == row) continue;
            const double factor = T(i, col);
            if (factor == 0.0) continue;
            T.row(i) -= factor * T.row(row);
            rhs(i) -= factor * rhs(row);
        }
        basis[static_cast<size_t>(row)] = col;
    }
};

// Reduced costs r_j = f_j - sum_i f(basis_i) T_ij and objective f_B' rhs.
void reduced_costs(const Tableau& tab, const Eigen::VectorXd& f,
                   Eigen::VectorXd& r, double& objective) {
    r = f;
    objective = 0.0;
    for (int i = 0; i < tab.rows(); ++i) {
        const double fb = f(tab.basis[static_cast<size_t>(i)]);
        if (fb == 0.0) continue;
        r -= fb * tab.T.row(i).transpose();
        objective += fb * tab.rhs(i);
    }
}

enum class PhaseOutcome { Optimal, Unbounded, IterationLimit };

// Bland's rule: entering column is the lowest-index improving one, leaving row
// breaks ratio ties by lowest basic variable index.
PhaseOutcome run_simplex(Tableau& tab, const Eigen::VectorXd& f, Eigen::VectorXd& r) {
    double objective = 0.0;
    reduced_costs(tab, f, r, objective);
    const int max_iter = 200 * (tab.rows() + tab.cols() + 5);
    for (int iter = 0; iter < max_iter; ++iter) {
        int entering = -1;
        for (int j = 0; j < tab.cols(); ++j) {
            if (tab.blocked[static_cast<size_t>(j)]) continue;
            if (r(j) < -kReducedCostTol) {
                entering = j;
                break;
            }
        }
        if (entering < 0) return PhaseOutcome::Optimal;

        int leaving = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < tab.rows(); ++i) {
            const double a = tab.T(i, entering);
            if (a <= kPivotTol) continue;
            const double ratio = tab.rhs(i) / a;
            if (ratio < best_ratio - 1e-14 ||
                (ratio < best_ratio + 1e-14 && leaving >= 0 &&
                 tab.basis[static_cast<size_t>(i)] < tab.basis[static_cast<size_t>(leaving)])) {
                best_ratio = ratio;
                leaving = i;
            }
        }
        if (leaving < 0) return PhaseOutcome::Unbounded;

        const double rc = r(entering);
        tab.pivot(leaving, entering);
        // One-row update of the reduced-cost vector keeps the invariant exact.
        r -= rc * tab.T.row(leaving).transpose();
        r(entering) = 0.0;
    }
    return PhaseOutcome::IterationLimit;
}

}  // namespace

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

LpSolution solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& H,
                    const Eigen::VectorXd& g) {
    const int d = static_cast<int>(c.size());
    const int p = static_cast<int>(H.rows());
    if (H.cols() != d || g.size() != p) {
        throw ContractViolation("solve_lp: dimension mismatch");
    }

    LpSolution sol;
    sol.x = Eigen::VectorXd::Zero(d);
    sol.dual = Eigen::VectorXd::Zero(p);
    if (p == 0) {
        // No constraints: bounded only for a zero objective.
        if (c.lpNorm<Eigen::Infinity>() == 0.0) {
            sol.status = LpStatus::Optimal;
            sol.value = 0.0;
        } else {
            sol.status = LpStatus::Unbounded;
        }
        return sol;
    }

    std::vector<int> flipped;
    for (int i = 0; i < p; ++i) {
        if (g(i) < 0.0) flipped.push_back(i);
    }
    const int n_art = static_cast<int>(flipped.size());
    const int n_cols = 2 * d + p + n_art;

    Tableau tab;
    tab.T = Eigen::MatrixXd::Zero(p, n_cols);
    tab.rhs = Eigen::VectorXd::Zero(p);
    tab.basis.assign(static_cast<size_t>(p), -1);
    tab.blocked.assign(static_cast<size_t>(n_cols), false);

    int art = 0;
    for (int i = 0; i < p; ++i) {
        const double sign = (g(i) < 0.0) ? -1.0 : 1.0;
        tab.T.block(i, 0, 1, d) = sign * H.row(i);
        tab.T.block(i, d, 1, d) = -sign * H.row(i);
        tab.T(i, 2 * d + i) = sign;
        tab.rhs(i) = sign * g(i);
        if (sign < 0.0) {
            tab.T(i, 2 * d + p + art) = 1.0;
            tab.basis[static_cast<size_t>(i)] = 2 * d + p + art;
            ++art;
        } else {
            tab.basis[static_cast<size_t>(i)] = 2 * d + i;
        }
    }

    Eigen::VectorXd r;
    if (n_art > 0) {
        Eigen::VectorXd f1 = Eigen::VectorXd::Zero(n_cols);
        f1.tail(n_art).setOnes();
        const PhaseOutcome out = run_simplex(tab, f1, r);
        if (out == PhaseOutcome::IterationLimit) {
            throw std::runtime_error("solve_lp: phase-1 iteration limit");
        }
        double phase1 = 0.0;
        for (int i = 0; i < p; ++i) {
            if (tab.basis[static_cast<size_t>(i)] >= 2 * d + p) phase1 += tab.rhs(i);
        }
        if (out == PhaseOutcome::Unbounded || phase1 > kFeasTol) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        // Pivot any degenerate artificial out of the basis before phase 2.
        for (int i = 0; i < p; ++i) {
            if (tab.basis[static_cast<size_t>(i)] < 2 * d + p) continue;
            int col = -1;
            for (int j = 0; j < 2 * d + p; ++j) {
                if (std::abs(tab.T(i, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) tab.pivot(i, col);
            // A fully zero row is redundant; its artificial stays basic at zero
            // and never re-enters because the columns below are blocked.
        }
        for (int j = 2 * d + p; j < n_cols; ++j) tab.blocked[static_cast<size_t>(j)] = true;
    }

    Eigen::VectorXd f2 = Eigen::VectorXd::Zero(n_cols);
    f2.head(d) = -c;
    f2.segment(d, d) = c;
    const PhaseOutcome out = run_simplex(tab, f2, r);
    if (out == PhaseOutcome::IterationLimit) {
        throw std::runtime_error("solve_lp: phase-2 iteration limit");
    }
    if (out == PhaseOutcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_cols);
    for (int i = 0; i < p; ++i) z(tab.basis[static_cast<size_t>(i)]) = tab.rhs(i);
    sol.x = z.head(d) - z.segment(d, d);
    sol.value = c.dot(sol.x);
    // The reduced cost of slack i equals the dual of row i in the original
    // orientation, for flipped and unflipped rows alike.
    for (int i = 0; i < p; ++i) sol.dual(i) = std::max(0.0, r(2 * d + i));
    sol.status = LpStatus::Optimal;
    return sol;
}

}  // namespace pmpc

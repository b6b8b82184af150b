#pragma once

#include <Eigen/Dense>

namespace pmpc {

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

/// Result of maximizing c'x over {x : Hx <= g}.
///
/// At an Optimal solution the dual vector satisfies H' dual = c, dual >= 0 and
/// dual_i (g_i - H_i x) = 0, which callers can use as a KKT certificate.
struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd dual;
};

/// Dense two-phase simplex with Bland's rule, maximizing c'x subject to Hx <= g.
///
/// Intended for the small polytope subproblems of this library (d <= ~10,
/// p <= ~200); deterministic for identical inputs.
LpSolution solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& H,
                    const Eigen::VectorXd& g);

}  // namespace pmpc

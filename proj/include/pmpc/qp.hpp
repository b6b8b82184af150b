#pragma once

#include <Eigen/Dense>

namespace pmpc {

enum class QpStatus { Optimal, Infeasible, MaxIter };

const char* to_string(QpStatus status);

/// Strictly convex quadratic program
///   minimize  u' Hess u + lin' u + const_term
///   subject to ineqA u <= ineqB.
struct QpForm {
    Eigen::MatrixXd Hess;   // symmetric, eigmin > 0
    Eigen::VectorXd lin;
    double const_term = 0.0;
    Eigen::MatrixXd ineqA;  // rows x vars (may be empty)
    Eigen::VectorXd ineqB;

    int num_vars() const { return static_cast<int>(Hess.rows()); }
    int num_rows() const { return static_cast<int>(ineqA.rows()); }
    double objective(const Eigen::VectorXd& u) const {
        return u.dot(Hess * u) + lin.dot(u) + const_term;
    }
};

struct QpSolution {
    QpStatus status = QpStatus::Infeasible;
    Eigen::VectorXd u;
    double value = 0.0;
    double kkt_residual = 0.0;
    Eigen::VectorXd dual;  // one multiplier per inequality row, >= 0
    int iterations = 0;
};

/// Dual active-set solve (Goldfarb–Idnani scheme): start at the unconstrained
/// minimizer and add the most violated constraint at a time, taking dual steps
/// that drop blocking constraints. Deterministic for identical inputs; an
/// unbounded dual step is an exact infeasibility certificate. Iteration cap
/// 10 * (rows + vars) yields MaxIter.
QpSolution solve_qp(const QpForm& qp);

}  // namespace pmpc

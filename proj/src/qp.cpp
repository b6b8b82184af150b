#include "pmpc/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pmpc/errors.hpp"

namespace pmpc {

namespace {

constexpr double kViolationTol = 1e-10;
constexpr double kCurvatureTol = 1e-12;  // on z'np = ||z||_G^2
constexpr double kDualDirTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// KKT residual in the original (unscaled) row data.
double kkt_residual(const QpForm& qp, const Eigen::VectorXd& u, const Eigen::VectorXd& dual) {
    double res = (2.0 * qp.Hess * u + qp.lin + qp.ineqA.transpose() * dual)
                     .lpNorm<Eigen::Infinity>();
    if (qp.num_rows() > 0) {
        const Eigen::VectorXd slack = qp.ineqB - qp.ineqA * u;
        res = std::max(res, std::max(0.0, -slack.minCoeff()));
        res = std::max(res, std::max(0.0, -dual.minCoeff()));
        res = std::max(res, dual.cwiseProduct(slack).cwiseAbs().maxCoeff());
    }
    return res;
}

}  // namespace

const char* to_string(QpStatus status) {
    switch (status) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

QpSolution solve_qp(const QpForm& qp) {
    const int n = qp.num_vars();
    const int rows = qp.num_rows();
    if (qp.Hess.cols() != n || qp.lin.size() != n ||
        (rows > 0 && qp.ineqA.cols() != n) || qp.ineqB.size() != rows) {
        throw ContractViolation("solve_qp: dimension mismatch");
    }

    QpSolution sol;
    sol.dual = Eigen::VectorXd::Zero(rows);

    const Eigen::MatrixXd G = qp.Hess + qp.Hess.transpose();  // gradient form, PD
    Eigen::LLT<Eigen::MatrixXd> g_llt(G);
    if (g_llt.info() != Eigen::Success) {
        throw ContractViolation("solve_qp: Hessian is not positive definite");
    }

    // Normalized >=-form constraints: normal_i' x >= offset_i. Zero rows are
    // vacuous when satisfiable and an immediate infeasibility certificate when
    // not. Row scales map internal duals back to the caller's rows.
    Eigen::MatrixXd normals(n, rows);
    Eigen::VectorXd offsets(rows);
    std::vector<double> scale(static_cast<size_t>(rows), 0.0);
    std::vector<bool> vacuous(static_cast<size_t>(rows), false);
    for (int i = 0; i < rows; ++i) {
        const double norm = qp.ineqA.row(i).norm();
        if (norm < 1e-14) {
            if (qp.ineqB(i) < -1e-12) {
                sol.status = QpStatus::Infeasible;
                sol.u = g_llt.solve(-qp.lin);
                sol.value = qp.objective(sol.u);
                sol.kkt_residual = kInf;
                return sol;
            }
            vacuous[static_cast<size_t>(i)] = true;
            continue;
        }
        scale[static_cast<size_t>(i)] = norm;
        normals.col(i) = -qp.ineqA.row(i).transpose() / norm;
        offsets(i) = -qp.ineqB(i) / norm;
    }

    Eigen::VectorXd x = g_llt.solve(-qp.lin);

    std::vector<int> active;         // constraint indices, insertion order
    std::vector<double> multiplier;  // internal duals for the active rows
    const int max_iter = 10 * (rows + n);

    while (true) {
        // Most violated inactive constraint (lowest index wins ties).
        int p = -1;
        double worst = -kViolationTol;
        for (int i = 0; i < rows; ++i) {
            if (vacuous[static_cast<size_t>(i)]) continue;
            bool in_active = false;
            for (const int k : active) {
                if (k == i) { in_active = true; break; }
            }
            if (in_active) continue;
            const double v = normals.col(i).dot(x) - offsets(i);
            if (v < worst) {
                worst = v;
                p = i;
            }
        }
        if (p < 0) break;  // primal feasible => optimal

        const Eigen::VectorXd np = normals.col(p);
        double u_p = 0.0;

        while (true) {
            if (sol.iterations++ >= max_iter) {
                sol.status = QpStatus::MaxIter;
                sol.u = x;
                sol.value = qp.objective(x);
                sol.kkt_residual = kkt_residual(qp, x, sol.dual);
                return sol;
            }

            const int q = static_cast<int>(active.size());
            Eigen::VectorXd z;
            Eigen::VectorXd r(q);
            if (q == 0) {
                z = g_llt.solve(np);
            } else {
                Eigen::MatrixXd N(n, q);
                for (int k = 0; k < q; ++k) N.col(k) = normals.col(active[static_cast<size_t>(k)]);
                const Eigen::MatrixXd Y = g_llt.solve(N);   // G^{-1} N
                const Eigen::MatrixXd M = N.transpose() * Y;
                r = M.ldlt().solve(N.transpose() * g_llt.solve(np));
                z = g_llt.solve(np - N * r);
            }

            // Blocking active constraint for the dual update (min ratio,
            // first index wins ties).
            double t1 = kInf;
            int blocking = -1;
            for (int k = 0; k < q; ++k) {
                if (r(k) > kDualDirTol) {
                    const double ratio = multiplier[static_cast<size_t>(k)] / r(k);
                    if (ratio < t1) {
                        t1 = ratio;
                        blocking = k;
                    }
                }
            }

            const double curvature = z.dot(np);  // = ||z||_G^2
            const double violation = np.dot(x) - offsets(p);
            const double t2 = curvature > kCurvatureTol ? -violation / curvature : kInf;

            if (t1 == kInf && t2 == kInf) {
                // The dual direction is a ray certifying that constraint p is
                // inconsistent with the active set: no feasible point exists.
                sol.status = QpStatus::Infeasible;
                sol.u = x;
                sol.value = qp.objective(x);
                sol.kkt_residual = -violation;  // unrepairable violation
                return sol;
            }

            const double t = std::min(t1, t2);
            if (t2 != kInf) x += t * z;
            for (int k = 0; k < q; ++k) multiplier[static_cast<size_t>(k)] -= t * r(k);
            u_p += t;

            if (t == t2 && t2 != kInf) {
                active.push_back(p);
                multiplier.push_back(u_p);
                break;
            }
            // Partial or pure dual step: drop the blocking constraint and retry p.
            active.erase(active.begin() + blocking);
            multiplier.erase(multiplier.begin() + blocking);
        }
    }

    sol.status = QpStatus::Optimal;
    sol.u = x;
    sol.value = qp.objective(x);
    for (size_t k = 0; k < active.size(); ++k) {
        const int i = active[k];
        sol.dual(i) = multiplier[k] / scale[static_cast<size_t>(i)];
    }
    sol.kkt_residual = kkt_residual(qp, x, sol.dual);
    return sol;
}

}  // namespace pmpc

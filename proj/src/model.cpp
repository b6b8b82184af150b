#include "pmpc/model.hpp"

#include <cmath>
#include <limits>

#include "pmpc/errors.hpp"

namespace pmpc {

namespace {

void check_dims(const char* who, const DynamicsModel& model, const Eigen::VectorXd& x,
                const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    if (x.size() != model.state_dim() || u.size() != model.input_dim() ||
        w.size() != model.disturbance_dim()) {
        throw ContractViolation(std::string(who) + ": dimension mismatch");
    }
}

}  // namespace

DynamicsModel DynamicsModel::linear(LinearDynamics lin) {
    const int n = static_cast<int>(lin.A.rows());
    const int m = static_cast<int>(lin.B.cols());
    const int q = static_cast<int>(lin.Bw.cols());
    if (lin.A.cols() != n || lin.B.rows() != n || lin.Bw.rows() != n) {
        throw ContractViolation("DynamicsModel::linear: inconsistent matrix shapes");
    }
    DynamicsModel model;
    model.n_ = n;
    model.m_ = m;
    model.q_ = q;
    model.lin_ = std::move(lin);
    return model;
}

DynamicsModel DynamicsModel::nonlinear(int n, int m, int q, Evaluator f,
                                       JacobianEvaluator jacobians) {
    if (n <= 0 || m <= 0 || q <= 0 || !f) {
        throw ContractViolation("DynamicsModel::nonlinear: bad dimensions or evaluator");
    }
    DynamicsModel model;
    model.n_ = n;
    model.m_ = m;
    model.q_ = q;
    model.f_ = std::move(f);
    model.jacobians_ = std::move(jacobians);
    return model;
}

const LinearDynamics& DynamicsModel::linear_dynamics() const {
    if (!lin_) throw ContractViolation("linear_dynamics: model is nonlinear");
    return *lin_;
}

Eigen::VectorXd DynamicsModel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& w) const {
    if (!lin_ && !f_) throw ContractViolation("DynamicsModel: empty model");
    check_dims("DynamicsModel::evaluate", *this, x, u, w);
    if (lin_) {
        // Fixed evaluation order so repeated calls are bit-identical.
        Eigen::VectorXd next = lin_->A * x;
        next.noalias() += lin_->B * u;
        next.noalias() += lin_->Bw * w;
        return next;
    }
    Eigen::VectorXd next = f_(x, u, w);
    if (next.size() != n_) {
        throw ContractViolation("DynamicsModel::evaluate: evaluator output has wrong size");
    }
    return next;
}

LinearDynamics DynamicsModel::evaluate_jacobians(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& u,
                                                 const Eigen::VectorXd& w) const {
    check_dims("DynamicsModel::evaluate_jacobians", *this, x, u, w);
    if (lin_) return *lin_;
    if (jacobians_) {
        LinearDynamics jac = jacobians_(x, u, w);
        if (jac.A.rows() != n_ || jac.A.cols() != n_ || jac.B.rows() != n_ ||
            jac.B.cols() != m_ || jac.Bw.rows() != n_ || jac.Bw.cols() != q_) {
            throw ContractViolation("evaluate_jacobians: analytic Jacobian shape mismatch");
        }
        return jac;
    }
    throw ContractViolation("evaluate_jacobians: no analytic Jacobians available");
}

void CostWeights::validate(int n, int m, int q) const {
    if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m ||
        S.rows() != q || S.cols() != q) {
        throw ContractViolation("CostWeights: matrix shapes inconsistent with (n,m,q)");
    }
    const auto check = [](const Eigen::MatrixXd& M, const char* name, bool strict) {
        if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw ContractViolation(std::string("CostWeights: ") + name + " not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const double min_eig = es.eigenvalues().minCoeff();
        if (strict ? (min_eig <= 0.0) : (min_eig < -1e-12)) {
            throw ContractViolation(std::string("CostWeights: ") + name +
                                    (strict ? " must be positive definite"
                                            : " must be positive semidefinite"));
        }
    };
    check(Q, "Q", false);
    check(R, "R", true);
    check(S, "S", true);
}

PreviewWindow PreviewWindow::zero(int horizon, int q) {
    PreviewWindow window;
    window.values.assign(static_cast<size_t>(horizon), Eigen::VectorXd::Zero(q));
    return window;
}

double PreviewWindow::stacked_norm() const {
    double sum_sq = 0.0;
    for (const auto& w : values) sum_sq += w.squaredNorm();
    return std::sqrt(sum_sq);
}

Eigen::VectorXd step_dynamics(const DynamicsModel& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    return model.evaluate(x, u, w);
}

LinearDynamics jacobian_linearize(const DynamicsModel& model, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& u0, const Eigen::VectorXd& w0) {
    if (model.has_analytic_jacobians()) return model.evaluate_jacobians(x0, u0, w0);

    const auto fd_step = [](double coord) { return std::max(1e-6, 1e-6 * std::abs(coord)); };
    const auto column = [&](Eigen::VectorXd base, int j, const auto& eval) {
        const double h = fd_step(base(j));
        base(j) += h;
        const Eigen::VectorXd hi = eval(base);
        base(j) -= 2.0 * h;
        const Eigen::VectorXd lo = eval(base);
        return Eigen::VectorXd((hi - lo) / (2.0 * h));
    };

    LinearDynamics jac;
    jac.A.resize(model.state_dim(), model.state_dim());
    jac.B.resize(model.state_dim(), model.input_dim());
    jac.Bw.resize(model.state_dim(), model.disturbance_dim());
    for (int j = 0; j < model.state_dim(); ++j) {
        jac.A.col(j) = column(x0, j, [&](const Eigen::VectorXd& x) {
            return model.evaluate(x, u0, w0);
        });
    }
    for (int j = 0; j < model.input_dim(); ++j) {
        jac.B.col(j) = column(u0, j, [&](const Eigen::VectorXd& u) {
            return model.evaluate(x0, u, w0);
        });
    }
    for (int j = 0; j < model.disturbance_dim(); ++j) {
        jac.Bw.col(j) = column(w0, j, [&](const Eigen::VectorXd& w) {
            return model.evaluate(x0, u0, w);
        });
    }
    return jac;
}

PreviewWindow shift_preview(const PreviewWindow& window, const Eigen::VectorXd& w_incoming,
                            const HPolytope& W) {
    if (window.horizon() == 0) {
        throw ContractViolation("shift_preview: empty window");
    }
    if (!W.contains_point(w_incoming)) {
        throw ContractViolation("shift_preview: incoming disturbance outside W");
    }
    PreviewWindow shifted;
    shifted.values.assign(window.values.begin() + 1, window.values.end());
    shifted.values.push_back(w_incoming);
    return shifted;
}

PcReport validate_pc_set(const HPolytope& set) {
    PcReport report;
    report.nonempty = !is_empty(set);
    if (!report.nonempty) return report;
    report.bounded = is_bounded(set);
    // Rows are unit-norm, so after redundancy removal g_i is the distance from
    // the origin to facet i.
    const HPolytope reduced = remove_redundancy(set);
    report.interior_margin =
        reduced.num_rows() == 0 ? std::numeric_limits<double>::infinity()
                                : reduced.g().minCoeff();
    report.origin_interior = report.interior_margin > 1e-12;
    return report;
}

double jacobian_validation_error(const DynamicsModel& model,
                                 const std::vector<Eigen::VectorXd>& xs,
                                 const std::vector<Eigen::VectorXd>& us,
                                 const std::vector<Eigen::VectorXd>& ws) {
    if (xs.size() != us.size() || xs.size() != ws.size()) {
        throw ContractViolation("jacobian_validation_error: sample count mismatch");
    }
    if (!model.has_analytic_jacobians()) {
        throw ContractViolation("jacobian_validation_error: model has no analytic Jacobians");
    }
    // Compare analytic Jacobians against a finite-difference probe built from
    // the raw evaluator only.
    DynamicsModel probe = DynamicsModel::nonlinear(
        model.state_dim(), model.input_dim(), model.disturbance_dim(),
        [&model](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
            return model.evaluate(x, u, w);
        });
    double worst = 0.0;
    for (size_t k = 0; k < xs.size(); ++k) {
        const LinearDynamics analytic = model.evaluate_jacobians(xs[k], us[k], ws[k]);
        const LinearDynamics numeric = jacobian_linearize(probe, xs[k], us[k], ws[k]);
        const auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
            const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
            return (a - b).cwiseAbs().maxCoeff() / scale;
        };
        worst = std::max({worst, rel(analytic.A, numeric.A), rel(analytic.B, numeric.B),
                          rel(analytic.Bw, numeric.Bw)});
    }
    return worst;
}

}  // namespace pmpc

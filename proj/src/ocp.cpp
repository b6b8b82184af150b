#include "pmpc/ocp.hpp"

#include <cmath>
#include <limits>

#include "pmpc/errors.hpp"
#include "pmpc/log.hpp"

namespace pmpc {

void OcpSpec::validate() const {
    if (horizon < 1) throw ContractViolation("OcpSpec: horizon must be >= 1");
    weights.validate(model.state_dim(), model.input_dim(), model.disturbance_dim());
    if (X.ambient_dimension() != model.state_dim() ||
        U.ambient_dimension() != model.input_dim()) {
        throw ContractViolation("OcpSpec: constraint set dimensions mismatch");
    }
    if (terminal.Xf.ambient_dimension() != model.state_dim()) {
        throw ContractViolation("OcpSpec: terminal set dimension mismatch");
    }
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

QpForm condense_affine(const AffineHorizon& horizon, const Eigen::VectorXd& x0) {
    const int N = static_cast<int>(horizon.stages.size());
    if (N < 1) throw ContractViolation("condense_affine: empty horizon");
    const int n = static_cast<int>(horizon.stages[0].A.rows());
    const int m = static_cast<int>(horizon.stages[0].B.cols());
    if (x0.size() != n) throw ContractViolation("condense_affine: x0 dimension mismatch");
    if (!horizon.input_offsets.empty() &&
        static_cast<int>(horizon.input_offsets.size()) != N) {
        throw ContractViolation("condense_affine: input offset count mismatch");
    }

    // Stacked prediction over i = 1..N:  X = Phi x0 + Gamma U + gamma.
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(N * n, n);
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(N * n, N * m);
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(N * n);
    for (int i = 0; i < N; ++i) {
        const StageModel& stage = horizon.stages[static_cast<size_t>(i)];
        if (i == 0) {
            Phi.topRows(n) = stage.A;
            Gamma.topLeftCorner(n, m) = stage.B;
            gamma.head(n) = stage.c;
        } else {
            Phi.middleRows(i * n, n) = stage.A * Phi.middleRows((i - 1) * n, n);
            Gamma.middleRows(i * n, n) = stage.A * Gamma.middleRows((i - 1) * n, n);
            Gamma.block(i * n, i * m, n, m) = stage.B;
            gamma.segment(i * n, n) =
                stage.A * gamma.segment((i - 1) * n, n) + stage.c;
        }
    }

    // Q on stages 1..N-1, P on the terminal block, R per input block.
    Eigen::MatrixXd Qbar = Eigen::MatrixXd::Zero(N * n, N * n);
    for (int i = 0; i < N - 1; ++i) Qbar.block(i * n, i * n, n, n) = horizon.Q;
    Qbar.block((N - 1) * n, (N - 1) * n, n, n) = horizon.P;
    Eigen::MatrixXd Rbar = Eigen::MatrixXd::Zero(N * m, N * m);
    for (int i = 0; i < N; ++i) Rbar.block(i * m, i * m, m, m) = horizon.R;

    const Eigen::VectorXd drift = Phi * x0 + gamma;  // input-free prediction

    QpForm qp;
    qp.Hess = Gamma.transpose() * Qbar * Gamma + Rbar;
    qp.Hess = 0.5 * (qp.Hess + qp.Hess.transpose());
    qp.lin = 2.0 * Gamma.transpose() * Qbar * drift;
    qp.const_term = drift.dot(Qbar * drift) + x0.dot(horizon.Q * x0) +
                    horizon.cost_constant;

    const int n_state_rows = horizon.X->num_rows();
    const int n_input_rows = horizon.U->num_rows();
    const int n_term_rows = horizon.Xf->num_rows();
    const int total = N * n_state_rows + N * n_input_rows + n_term_rows;
    qp.ineqA = Eigen::MatrixXd::Zero(total, N * m);
    qp.ineqB = Eigen::VectorXd::Zero(total);

    int row = 0;
    // State rows: i = 0 is constant in u (feasible iff x0 in X); i >= 1 through
    // the prediction matrices.
    for (int i = 0; i < N; ++i) {
        if (i == 0) {
            qp.ineqB.segment(row, n_state_rows) = horizon.X->g() - horizon.X->H() * x0;
        } else {
            qp.ineqA.middleRows(row, n_state_rows) =
                horizon.X->H() * Gamma.middleRows((i - 1) * n, n);
            qp.ineqB.segment(row, n_state_rows) =
                horizon.X->g() - horizon.X->H() * drift.segment((i - 1) * n, n);
        }
        row += n_state_rows;
    }
    for (int i = 0; i < N; ++i) {
        qp.ineqA.block(row, i * m, n_input_rows, m) = horizon.U->H();
        qp.ineqB.segment(row, n_input_rows) = horizon.U->g();
        if (!horizon.input_offsets.empty()) {
            qp.ineqB.segment(row, n_input_rows) -=
                horizon.U->H() * horizon.input_offsets[static_cast<size_t>(i)];
        }
        row += n_input_rows;
    }
    qp.ineqA.middleRows(row, n_term_rows) =
        horizon.Xf->H() * Gamma.middleRows((N - 1) * n, n);
    qp.ineqB.segment(row, n_term_rows) =
        horizon.Xf->g() - horizon.Xf->H() * drift.segment((N - 1) * n, n);
    return qp;
}

QpForm condense(const OcpSpec& spec, const Eigen::VectorXd& x0, const PreviewWindow& window) {
    if (!spec.model.is_linear()) {
        throw ContractViolation("condense: linear models only; nonlinear goes via solve_ocp");
    }
    if (window.horizon() != spec.horizon) {
        throw ContractViolation("condense: window length must equal the horizon");
    }
    const LinearDynamics& lin = spec.model.linear_dynamics();

    AffineHorizon horizon;
    horizon.Q = spec.weights.Q;
    horizon.R = spec.weights.R;
    horizon.P = spec.terminal.P;
    horizon.X = &spec.X;
    horizon.U = &spec.U;
    horizon.Xf = &spec.terminal.Xf;
    horizon.stages.reserve(static_cast<size_t>(spec.horizon));
    for (int i = 0; i < spec.horizon; ++i) {
        const Eigen::VectorXd& w = window.values[static_cast<size_t>(i)];
        horizon.stages.push_back({lin.A, lin.B, lin.Bw * w});
        horizon.cost_constant += w.dot(spec.weights.S * w);
    }
    return condense_affine(horizon, x0);
}

double evaluate_objective(const CostWeights& weights, const Eigen::MatrixXd& P,
                          const std::vector<Eigen::VectorXd>& x_seq,
                          const std::vector<Eigen::VectorXd>& u_seq,
                          const PreviewWindow& window) {
    const size_t N = u_seq.size();
    if (x_seq.size() != N + 1 || static_cast<size_t>(window.horizon()) != N) {
        throw ContractViolation("evaluate_objective: sequence length mismatch");
    }
    double value = 0.0;
    for (size_t i = 0; i < N; ++i) {
        value += x_seq[i].dot(weights.Q * x_seq[i]);
        value += u_seq[i].dot(weights.R * u_seq[i]);
        value += window.values[i].dot(weights.S * window.values[i]);
    }
    value += x_seq[N].dot(P * x_seq[N]);
    return value;
}

namespace {

SolveStatus map_status(QpStatus status) {
    switch (status) {
        case QpStatus::Optimal: return SolveStatus::Optimal;
        case QpStatus::Infeasible: return SolveStatus::Infeasible;
        case QpStatus::MaxIter: return SolveStatus::MaxIter;
    }
    return SolveStatus::Infeasible;
}

std::vector<Eigen::VectorXd> split_inputs(const Eigen::VectorXd& stacked, int N, int m) {
    std::vector<Eigen::VectorXd> u_seq;
    u_seq.reserve(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) u_seq.push_back(stacked.segment(i * m, m));
    return u_seq;
}

std::vector<Eigen::VectorXd> rollout(const DynamicsModel& model, const Eigen::VectorXd& x0,
                                     const std::vector<Eigen::VectorXd>& u_seq,
                                     const PreviewWindow& window) {
    std::vector<Eigen::VectorXd> x_seq;
    x_seq.reserve(u_seq.size() + 1);
    x_seq.push_back(x0);
    for (size_t i = 0; i < u_seq.size(); ++i) {
        x_seq.push_back(step_dynamics(model, x_seq.back(), u_seq[i], window.values[i]));
    }
    return x_seq;
}

double max_constraint_violation(const OcpSpec& spec,
                                const std::vector<Eigen::VectorXd>& x_seq,
                                const std::vector<Eigen::VectorXd>& u_seq) {
    double violation = 0.0;
    const auto row_violation = [&](const HPolytope& set, const Eigen::VectorXd& v) {
        if (set.num_rows() == 0) return;
        violation = std::max(violation, (set.H() * v - set.g()).maxCoeff());
    };
    for (size_t i = 0; i < u_seq.size(); ++i) {
        row_violation(spec.X, x_seq[i]);
        row_violation(spec.U, u_seq[i]);
    }
    row_violation(spec.terminal.Xf, x_seq.back());
    return violation;
}

OcpSolution solve_linear(const OcpSpec& spec, const Eigen::VectorXd& x0,
                         const PreviewWindow& window) {
    const QpForm qp = condense(spec, x0, window);
    const QpSolution qps = solve_qp(qp);

    OcpSolution sol;
    sol.status = map_status(qps.status);
    sol.kkt_residual = qps.kkt_residual;
    sol.linearization_passes = 1;
    sol.u_seq = split_inputs(qps.u, spec.horizon, spec.model.input_dim());
    sol.x_seq = rollout(spec.model, x0, sol.u_seq, window);
    sol.value = sol.status == SolveStatus::Infeasible
                    ? std::numeric_limits<double>::infinity()
                    : qps.value;
    return sol;
}

OcpSolution solve_successive_linearization(const OcpSpec& spec, const Eigen::VectorXd& x0,
                                           const PreviewWindow& window,
                                           const std::vector<Eigen::VectorXd>* warm_start) {
    const int N = spec.horizon;
    const int m = spec.model.input_dim();

    std::vector<Eigen::VectorXd> u_seq(static_cast<size_t>(N), Eigen::VectorXd::Zero(m));
    if (warm_start != nullptr && static_cast<int>(warm_start->size()) == N) {
        u_seq = *warm_start;
    }

    double cost_constant = 0.0;
    for (const auto& w : window.values) cost_constant += w.dot(spec.weights.S * w);

    OcpSolution sol;
    const int max_passes = 20;
    bool converged = false;
    for (int pass = 0; pass < max_passes; ++pass) {
        const std::vector<Eigen::VectorXd> x_ref = rollout(spec.model, x0, u_seq, window);

        AffineHorizon horizon;
        horizon.Q = spec.weights.Q;
        horizon.R = spec.weights.R;
        horizon.P = spec.terminal.P;
        horizon.X = &spec.X;
        horizon.U = &spec.U;
        horizon.Xf = &spec.terminal.Xf;
        horizon.cost_constant = cost_constant;
        for (int i = 0; i < N; ++i) {
            const Eigen::VectorXd& w = window.values[static_cast<size_t>(i)];
            const LinearDynamics jac =
                jacobian_linearize(spec.model, x_ref[static_cast<size_t>(i)],
                                   u_seq[static_cast<size_t>(i)], w);
            // First-order expansion about the reference with the known w folded
            // into the affine term.
            const Eigen::VectorXd c =
                step_dynamics(spec.model, x_ref[static_cast<size_t>(i)],
                              u_seq[static_cast<size_t>(i)], w) -
                jac.A * x_ref[static_cast<size_t>(i)] - jac.B * u_seq[static_cast<size_t>(i)];
            horizon.stages.push_back({jac.A, jac.B, c});
        }

        const QpSolution qps = solve_qp(condense_affine(horizon, x0));
        sol.linearization_passes = pass + 1;
        if (qps.status == QpStatus::Infeasible) {
            sol.status = SolveStatus::Infeasible;
            sol.u_seq = u_seq;
            sol.x_seq = rollout(spec.model, x0, u_seq, window);
            sol.value = std::numeric_limits<double>::infinity();
            sol.kkt_residual = qps.kkt_residual;
            return sol;
        }
        const std::vector<Eigen::VectorXd> u_next = split_inputs(qps.u, N, m);
        double change = 0.0;
        for (int i = 0; i < N; ++i) {
            change = std::max(change, (u_next[static_cast<size_t>(i)] -
                                       u_seq[static_cast<size_t>(i)])
                                          .lpNorm<Eigen::Infinity>());
        }
        u_seq = u_next;
        sol.kkt_residual = qps.kkt_residual;
        if (change <= 1e-8) {
            converged = true;
            break;
        }
    }

    sol.u_seq = u_seq;
    sol.x_seq = rollout(spec.model, x0, u_seq, window);
    sol.value = evaluate_objective(spec.weights, spec.terminal.P, sol.x_seq, sol.u_seq, window);
    const double violation = max_constraint_violation(spec, sol.x_seq, sol.u_seq);
    sol.status = (converged && violation <= 1e-7) ? SolveStatus::Optimal : SolveStatus::MaxIter;
    return sol;
}

}  // namespace

OcpSolution solve_ocp(const OcpSpec& spec, const Eigen::VectorXd& x0,
                      const PreviewWindow& window,
                      const std::vector<Eigen::VectorXd>* warm_start) {
    spec.validate();
    if (window.horizon() != spec.horizon) {
        throw ContractViolation("solve_ocp: window length must equal the horizon");
    }
    for (const auto& w : window.values) {
        if (w.size() != spec.model.disturbance_dim()) {
            throw ContractViolation("solve_ocp: window element dimension mismatch");
        }
    }
    if (x0.size() != spec.model.state_dim()) {
        throw ContractViolation("solve_ocp: x0 dimension mismatch");
    }

    if (spec.model.is_linear()) return solve_linear(spec, x0, window);
    return solve_successive_linearization(spec, x0, window, warm_start);
}

}  // namespace pmpc

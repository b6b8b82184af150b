#include "pmpc/controllers.hpp"

#include <limits>
#include <string>

#include "pmpc/errors.hpp"
#include "pmpc/log.hpp"

namespace pmpc {

ControllerKind controller_from_string(std::string_view name) {
    if (name == "preview") return ControllerKind::Preview;
    if (name == "nominal") return ControllerKind::Nominal;
    if (name == "drmpc") return ControllerKind::Drmpc;
    if (name == "terminal") return ControllerKind::TerminalLaw;
    throw ParseError("unknown controller kind: " + std::string(name));
}

const char* to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::Preview: return "preview";
        case ControllerKind::Nominal: return "nominal";
        case ControllerKind::Drmpc: return "drmpc";
        case ControllerKind::TerminalLaw: return "terminal";
    }
    return "unknown";
}

namespace {

ControlStep finalize(const OcpSpec& spec, const Eigen::VectorXd& x, OcpSolution sol,
                     const Eigen::VectorXd& feedforward) {
    ControlStep step;
    if (sol.status == SolveStatus::Infeasible) {
        // Emergency fallback so batch runs complete; callers must treat any
        // fallback as a failed certification.
        step.u = terminal_law(spec.terminal.K, x);
        step.used_fallback = true;
        log_info("infeasible solve: falling back to terminal law");
    } else {
        step.u = sol.u_seq.front() + feedforward;
    }
    step.solution = std::move(sol);
    return step;
}

}  // namespace

ControlStep preview_mpc_step(const OcpSpec& spec, const Eigen::VectorXd& x,
                             const PreviewWindow& window,
                             const std::vector<Eigen::VectorXd>* warm_start) {
    return finalize(spec, x, solve_ocp(spec, x, window, warm_start),
                    Eigen::VectorXd::Zero(spec.model.input_dim()));
}

ControlStep nominal_mpc_step(const OcpSpec& spec, const Eigen::VectorXd& x) {
    const PreviewWindow zero =
        PreviewWindow::zero(spec.horizon, spec.model.disturbance_dim());
    return finalize(spec, x, solve_ocp(spec, x, zero),
                    Eigen::VectorXd::Zero(spec.model.input_dim()));
}

ControlStep drmpc_step(const OcpSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& w_now) {
    spec.validate();
    if (!spec.model.is_linear()) {
        throw ContractViolation("drmpc_step: linear models only");
    }
    if (w_now.size() != spec.model.disturbance_dim()) {
        throw ContractViolation("drmpc_step: disturbance dimension mismatch");
    }
    const LinearDynamics& lin = spec.model.linear_dynamics();
    const int n = spec.model.state_dim();
    const int m = spec.model.input_dim();

    const Eigen::MatrixXd pinv_b =
        lin.B.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd u_ff = -pinv_b * (lin.Bw * w_now);
    const Eigen::VectorXd residual =
        (Eigen::MatrixXd::Identity(n, n) - lin.B * pinv_b) * (lin.Bw * w_now);

    AffineHorizon horizon;
    horizon.Q = spec.weights.Q;
    horizon.R = spec.weights.R;
    horizon.P = spec.terminal.P;
    horizon.X = &spec.X;
    horizon.U = &spec.U;
    horizon.Xf = &spec.terminal.Xf;
    horizon.input_offsets.assign(static_cast<size_t>(spec.horizon),
                                 Eigen::VectorXd::Zero(m));
    horizon.input_offsets[0] = u_ff;
    for (int i = 0; i < spec.horizon; ++i) {
        horizon.stages.push_back(
            {lin.A, lin.B, i == 0 ? residual : Eigen::VectorXd::Zero(n).eval()});
    }

    const QpSolution qps = solve_qp(condense_affine(horizon, x));

    OcpSolution sol;
    sol.linearization_passes = 1;
    sol.kkt_residual = qps.kkt_residual;
    switch (qps.status) {
        case QpStatus::Optimal: sol.status = SolveStatus::Optimal; break;
        case QpStatus::Infeasible: sol.status = SolveStatus::Infeasible; break;
        case QpStatus::MaxIter: sol.status = SolveStatus::MaxIter; break;
    }
    sol.u_seq.reserve(static_cast<size_t>(spec.horizon));
    for (int i = 0; i < spec.horizon; ++i) sol.u_seq.push_back(qps.u.segment(i * m, m));
    // Predicted trajectory of the residual model (first stage carries the
    // unmatched disturbance, later stages are nominal).
    sol.x_seq.push_back(x);
    for (int i = 0; i < spec.horizon; ++i) {
        Eigen::VectorXd next = lin.A * sol.x_seq.back() + lin.B * sol.u_seq[static_cast<size_t>(i)];
        if (i == 0) next += residual;
        sol.x_seq.push_back(std::move(next));
    }
    sol.value = sol.status == SolveStatus::Infeasible
                    ? std::numeric_limits<double>::infinity()
                    : qps.value;
    return finalize(spec, x, std::move(sol), u_ff);
}

Eigen::VectorXd terminal_law(const Eigen::MatrixXd& K, const Eigen::VectorXd& x) {
    if (K.cols() != x.size()) throw ContractViolation("terminal_law: dimension mismatch");
    return K * x;
}

}  // namespace pmpc

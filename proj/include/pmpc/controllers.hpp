#pragma once

#include <string_view>

#include "pmpc/ocp.hpp"

namespace pmpc {

enum class ControllerKind { Preview, Nominal, Drmpc, TerminalLaw };

ControllerKind controller_from_string(std::string_view name);
const char* to_string(ControllerKind kind);

/// One receding-horizon step: the applied input, the full solution for
/// diagnostics, and whether the terminal-law fallback replaced an infeasible
/// solve (fallbacks are recorded, never silent).
struct ControlStep {
    Eigen::VectorXd u;
    OcpSolution solution;
    bool used_fallback = false;
};

/// Proposed controller: solves the preview problem and applies the first input.
ControlStep preview_mpc_step(const OcpSpec& spec, const Eigen::VectorXd& x,
                             const PreviewWindow& window,
                             const std::vector<Eigen::VectorXd>* warm_start = nullptr);

/// Baseline that ignores the disturbance: the preview problem with a zero window.
ControlStep nominal_mpc_step(const OcpSpec& spec, const Eigen::VectorXd& x);

/// Feedforward-compensation baseline: u = u_c + u_ff with
/// u_ff = -pinv(B) Bw w_now cancelling the matched part of the current
/// disturbance, and u_c from a nominal problem over the residual dynamics
/// x+ = Ax + Bu_c + (I - B pinv(B)) Bw w_now at the first step (w = 0 beyond),
/// with the input constraint imposed on the total u_c + u_ff. Linear models only.
ControlStep drmpc_step(const OcpSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& w_now);

/// u = Kx.
Eigen::VectorXd terminal_law(const Eigen::MatrixXd& K, const Eigen::VectorXd& x);

}  // namespace pmpc

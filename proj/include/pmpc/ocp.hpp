#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pmpc/model.hpp"
#include "pmpc/qp.hpp"
#include "pmpc/synthesis.hpp"

namespace pmpc {

/// Everything a finite-horizon solve needs besides the current state and the
/// disturbance window.
struct OcpSpec {
    DynamicsModel model;
    int horizon = 1;
    HPolytope X;
    HPolytope U;
    CostWeights weights;
    TerminalIngredients terminal;

    void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, MaxIter };

const char* to_string(SolveStatus status);

struct OcpSolution {
    std::vector<Eigen::VectorXd> u_seq;  // N inputs
    std::vector<Eigen::VectorXd> x_seq;  // N+1 states, x_seq[0] = x0
    double value = 0.0;
    SolveStatus status = SolveStatus::Infeasible;
    double kkt_residual = 0.0;
    int linearization_passes = 0;  // > 1 only on the nonlinear path
};

/// Time-varying affine prediction stage x_{i+1} = A x_i + B u_i + c.
struct StageModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::VectorXd c;
};

/// Condensing input shared by the preview, nominal and feedforward variants:
/// quadratic stage costs, per-stage affine dynamics, polytopic state/input
/// constraints (with optional per-stage input offsets) and the terminal set.
struct AffineHorizon {
    std::vector<StageModel> stages;
    Eigen::MatrixXd Q, R, P;
    const HPolytope* X = nullptr;
    const HPolytope* U = nullptr;
    const HPolytope* Xf = nullptr;
    std::vector<Eigen::VectorXd> input_offsets;  // empty or N entries; row rhs
                                                 // becomes g_U - H_U * offset_i
    double cost_constant = 0.0;
};

/// Dense condensing of an affine horizon into a strictly convex QP in the
/// stacked input sequence. Row order: state rows for i = 0..N-1 (the i = 0
/// block is constant in u and encodes x0 in X), then input rows for
/// i = 0..N-1, then terminal rows.
QpForm condense_affine(const AffineHorizon& horizon, const Eigen::VectorXd& x0);

/// Dense condensing of the preview problem for a linear model: disturbances
/// enter the prediction as known affine terms and the cost picks up the
/// constant sum of ||w_i||_S^2.
QpForm condense(const OcpSpec& spec, const Eigen::VectorXd& x0, const PreviewWindow& window);

/// Solves the preview optimal control problem. Linear models condense to a
/// single QP; nonlinear models run successive linearization around the
/// previous iterate (warm start optional), re-condensing until the input
/// sequence settles below 1e-8 or 20 passes elapse.
OcpSolution solve_ocp(const OcpSpec& spec, const Eigen::VectorXd& x0,
                      const PreviewWindow& window,
                      const std::vector<Eigen::VectorXd>* warm_start = nullptr);

/// Stage-cost sum plus terminal cost along an explicit trajectory.
double evaluate_objective(const CostWeights& weights, const Eigen::MatrixXd& P,
                          const std::vector<Eigen::VectorXd>& x_seq,
                          const std::vector<Eigen::VectorXd>& u_seq,
                          const PreviewWindow& window);

}  // namespace pmpc

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "pmpc/polytope.hpp"

namespace pmpc {

/// x+ = Ax + Bu + Bw w.
struct LinearDynamics {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Bw;
};

/// Discrete-time plant x+ = f(x, u, w), either exactly linear or a nonlinear
/// evaluator with optional analytic Jacobians. Immutable after construction;
/// evaluator callbacks must be reentrant.
class DynamicsModel {
public:
    using Evaluator = std::function<Eigen::VectorXd(
        const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&)>;
    using JacobianEvaluator = std::function<LinearDynamics(
        const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

    /// Empty placeholder; any evaluation throws until a real model is assigned.
    DynamicsModel() = default;

    static DynamicsModel linear(LinearDynamics lin);
    static DynamicsModel nonlinear(int n, int m, int q, Evaluator f,
                                   JacobianEvaluator jacobians = nullptr);

    int state_dim() const { return n_; }
    int input_dim() const { return m_; }
    int disturbance_dim() const { return q_; }
    bool is_linear() const { return lin_.has_value(); }
    bool has_analytic_jacobians() const { return is_linear() || jacobians_ != nullptr; }
    const LinearDynamics& linear_dynamics() const;

    Eigen::VectorXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& w) const;
    LinearDynamics evaluate_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& w) const;

private:
    int n_ = 0, m_ = 0, q_ = 0;
    std::optional<LinearDynamics> lin_;
    Evaluator f_;
    JacobianEvaluator jacobians_;
};

/// Stage-cost weights for ||x||_Q^2 + ||u||_R^2 + ||w||_S^2.
struct CostWeights {
    Eigen::MatrixXd Q;  // n x n, symmetric PSD
    Eigen::MatrixXd R;  // m x m, symmetric PD
    Eigen::MatrixXd S;  // q x q, symmetric PD

    /// Throws ContractViolation on asymmetry (1e-12) or wrong eigenvalue signs.
    void validate(int n, int m, int q) const;
};

/// The N-step disturbance forecast w(k|k) ... w(k+N-1|k).
struct PreviewWindow {
    std::vector<Eigen::VectorXd> values;

    static PreviewWindow zero(int horizon, int q);
    int horizon() const { return static_cast<int>(values.size()); }
    /// Stacked Euclidean norm of the whole window.
    double stacked_norm() const;
};

struct AugmentedState {
    Eigen::VectorXd x;
    PreviewWindow window;
};

/// f(x, u, w); for linear models the fixed evaluation order Ax + Bu + Bw w.
Eigen::VectorXd step_dynamics(const DynamicsModel& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& w);

/// (A, B, Bw) at the given point: exact for linear models, analytic when
/// supplied, otherwise central finite differences with relative step 1e-6
/// (absolute floor 1e-6).
LinearDynamics jacobian_linearize(const DynamicsModel& model, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& u0, const Eigen::VectorXd& w0);

/// Drops the head of the window and appends w_incoming, which must lie in W
/// (elementwise Hw <= g + 1e-9).
PreviewWindow shift_preview(const PreviewWindow& window, const Eigen::VectorXd& w_incoming,
                            const HPolytope& W);

/// PC-set verification report: closed bounded convex with 0 in the interior.
struct PcReport {
    bool nonempty = false;
    bool bounded = false;
    bool origin_interior = false;
    double interior_margin = 0.0;  // min distance from the origin to a facet
    bool pass() const { return nonempty && bounded && origin_interior; }
};

PcReport validate_pc_set(const HPolytope& set);

/// Worst relative mismatch between analytic Jacobians and central finite
/// differences over the supplied sample points.
double jacobian_validation_error(const DynamicsModel& model,
                                 const std::vector<Eigen::VectorXd>& xs,
                                 const std::vector<Eigen::VectorXd>& us,
                                 const std::vector<Eigen::VectorXd>& ws);

}  // namespace pmpc

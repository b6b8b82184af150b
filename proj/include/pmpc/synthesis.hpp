#pragma once

#include <Eigen/Dense>

#include "pmpc/model.hpp"
#include "pmpc/polytope.hpp"

namespace pmpc {

/// Offline products that make the receding-horizon loop stabilizing: a local
/// gain K, terminal weight P, decrease-margin weight Delta, its multiplier
/// lambda, and the robust positively invariant terminal set Xf.
struct TerminalIngredients {
    Eigen::MatrixXd K;      // m x n
    Eigen::MatrixXd P;      // n x n, symmetric PD
    Eigen::MatrixXd Delta;  // n x n, symmetric PD
    double lambda = 2.0;    // >= 1
    HPolytope Xf;
};

/// Margins from checking the terminal ingredients against the constraint data.
/// All four must be >= -1e-8 for `certified`.
struct CertificateReport {
    double decrease_residual_eigmin = 0.0;  // eigmin of P - Ak'PAk - (Q+K'RK) - Delta
    double rpi_margin = 0.0;                // min_i g_i - h_Xf(Ak'Hi') - h_W(Bw'Hi')
    double state_margin = 0.0;              // Xf inside X
    double input_margin = 0.0;              // K*Xf inside U
    bool certified = false;
};

/// Ultimate-bound level set {x : x'Px <= beta} for the terminal closed loop.
struct IssLevelSet {
    double beta = 0.0;
    Eigen::MatrixXd P;

    bool contains(const Eigen::VectorXd& x, double slack = 0.0) const {
        return x.dot(P * x) <= beta * (1.0 + slack) + 1e-12;
    }
};

/// Largest-magnitude eigenvalue of a (generally nonsymmetric) real matrix.
double spectral_radius(const Eigen::MatrixXd& M);

/// Infinite-horizon discrete Riccati gain K for (A, B, Q, R); A + BK strictly
/// stable. Throws SynthesisError when (A, B) is not stabilizable or the
/// fixed-point iteration fails to reach residual 1e-12 within 1e4 sweeps.
Eigen::MatrixXd synthesize_gain(const LinearDynamics& lin, const CostWeights& weights);

/// P solving P = Ak' P Ak + (Q + K'RK + lambda*Delta) by Kronecker
/// vectorization, symmetrized; requires rho(Ak) < 1, lambda >= 1, Delta PD.
Eigen::MatrixXd solve_terminal_weight(const LinearDynamics& lin, const Eigen::MatrixXd& K,
                                      const CostWeights& weights,
                                      const Eigen::MatrixXd& Delta, double lambda);

/// Maximal robust positively invariant subset of X ∩ {x : Kx in U} for
/// x+ = (A+BK)x + Bw w, w in W, via the intersect-with-preimage fixed point.
/// Throws SynthesisError on emptiness or when 500 iterations do not converge.
HPolytope compute_terminal_set(const LinearDynamics& lin, const Eigen::MatrixXd& K,
                               const HPolytope& X, const HPolytope& U, const HPolytope& W);

CertificateReport verify_assumption_margins(const TerminalIngredients& ing,
                                            const LinearDynamics& lin,
                                            const CostWeights& weights, const HPolytope& X,
                                            const HPolytope& U, const HPolytope& W);

/// Quadratic ultimate-bound estimate beta = lmax(P) * rho(r) / (lmin(Q)+lmin(Delta))
/// with rho(s) = lmax(P) ||Bw||^2 s^2 and r the bounding radius of W. An
/// estimate validated empirically, not a certificate.
IssLevelSet iss_level_set(const TerminalIngredients& ing, const LinearDynamics& lin,
                          const CostWeights& weights, const HPolytope& W);

/// Full offline pipeline: LQR gain, terminal-set iteration, Lyapunov weight,
/// margin verification (report returned through `report` when non-null).
TerminalIngredients synthesize_terminal_ingredients(const LinearDynamics& lin,
                                                    const CostWeights& weights,
                                                    const HPolytope& X, const HPolytope& U,
                                                    const HPolytope& W,
                                                    const Eigen::MatrixXd& Delta,
                                                    double lambda,
                                                    CertificateReport* report = nullptr);

}  // namespace pmpc

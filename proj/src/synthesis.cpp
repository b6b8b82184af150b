#include "pmpc/synthesis.hpp"

#include <complex>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

#include "pmpc/errors.hpp"
#include "pmpc/log.hpp"

namespace pmpc {

namespace {

constexpr double kMarginTol = 1e-8;

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    // PBH test on every eigenvalue on or outside the unit circle:
    // rank [A - lambda I, B] must equal n.
    const int n = static_cast<int>(A.rows());
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    for (int k = 0; k < n; ++k) {
        const std::complex<double> lambda = es.eigenvalues()(k);
        if (std::abs(lambda) < 1.0 - 1e-9) continue;
        Eigen::MatrixXcd pencil(n, n + B.cols());
        pencil << A.cast<std::complex<double>>() -
                      lambda * Eigen::MatrixXcd::Identity(n, n),
            B.cast<std::complex<double>>();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(pencil);
        qr.setThreshold(1e-10);
        if (qr.rank() < n) return false;
    }
    return true;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& M) {
    return Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd synthesize_gain(const LinearDynamics& lin, const CostWeights& weights) {
    const Eigen::MatrixXd& A = lin.A;
    const Eigen::MatrixXd& B = lin.B;
    const Eigen::MatrixXd& Q = weights.Q;
    const Eigen::MatrixXd& R = weights.R;
    if (!is_stabilizable(A, B)) {
        throw SynthesisError("synthesize_gain: (A, B) is not stabilizable");
    }

    Eigen::MatrixXd P = Q;
    const int max_iter = 10000;
    bool converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::MatrixXd BtP = B.transpose() * P;
        const Eigen::MatrixXd gain_term =
            (R + BtP * B).ldlt().solve(BtP * A);  // (R + B'PB)^{-1} B'PA
        Eigen::MatrixXd P_next =
            Q + A.transpose() * P * A - A.transpose() * P * B * gain_term;
        P_next = 0.5 * (P_next + P_next.transpose());
        const double diff = (P_next - P).norm();
        P = P_next;
        if (diff <= 1e-12 * std::max(1.0, P.norm())) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw SynthesisError("synthesize_gain: Riccati iteration did not converge");
    }

    const Eigen::MatrixXd K =
        -(R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
    const double rho = spectral_radius(A + B * K);
    if (rho >= 1.0 - 1e-9) {
        throw SynthesisError("synthesize_gain: closed loop not strictly stable (rho = " +
                             std::to_string(rho) + ")");
    }
    return K;
}

Eigen::MatrixXd solve_terminal_weight(const LinearDynamics& lin, const Eigen::MatrixXd& K,
                                      const CostWeights& weights,
                                      const Eigen::MatrixXd& Delta, double lambda) {
    const int n = static_cast<int>(lin.A.rows());
    if (lambda < 1.0) {
        throw SynthesisError("solve_terminal_weight: lambda must be >= 1");
    }
    if (Delta.rows() != n || Delta.cols() != n) {
        throw ContractViolation("solve_terminal_weight: Delta shape mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> delta_eigs(Delta);
    if (delta_eigs.eigenvalues().minCoeff() <= 0.0) {
        throw SynthesisError("solve_terminal_weight: Delta must be positive definite");
    }
    const Eigen::MatrixXd Ak = lin.A + lin.B * K;
    if (spectral_radius(Ak) >= 1.0 - 1e-9) {
        throw SynthesisError("solve_terminal_weight: A + BK is not strictly stable");
    }

    const Eigen::MatrixXd M =
        weights.Q + K.transpose() * weights.R * K + lambda * Delta;
    // vec(Ak' P Ak) = (Ak' ⊗ Ak') vec(P), so P solves a dense n^2 x n^2 system.
    const Eigen::MatrixXd AkT = Ak.transpose();
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n * n, n * n) -
                                Eigen::kroneckerProduct(AkT, AkT);
    const Eigen::VectorXd vec_m =
        Eigen::Map<const Eigen::VectorXd>(M.data(), n * n);
    const Eigen::VectorXd vec_p = lhs.partialPivLu().solve(vec_m);
    Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), n, n);
    P = 0.5 * (P + P.transpose());

    const double residual = (P - AkT * P * Ak - M).norm();
    if (residual > 1e-10 * std::max(1.0, P.norm())) {
        throw SynthesisError("solve_terminal_weight: Lyapunov residual too large");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> p_eigs(P);
    if (p_eigs.eigenvalues().minCoeff() <= 0.0) {
        throw SynthesisError("solve_terminal_weight: P is not positive definite");
    }
    return P;
}

HPolytope compute_terminal_set(const LinearDynamics& lin, const Eigen::MatrixXd& K,
                               const HPolytope& X, const HPolytope& U, const HPolytope& W) {
    const Eigen::MatrixXd Ak = lin.A + lin.B * K;
    if (spectral_radius(Ak) >= 1.0 - 1e-9) {
        throw SynthesisError("compute_terminal_set: A + BK is not strictly stable");
    }

    // Constraint-admissible seed: X ∩ {x : Kx in U}.
    HPolytope omega = intersect(X, affine_preimage(U, K));
    if (omega.known_empty()) {
        throw SynthesisError("compute_terminal_set: X ∩ {Kx in U} is empty");
    }

    const int max_iter = 500;
    for (int iter = 0; iter < max_iter; ++iter) {
        const HPolytope eroded = pontryagin_difference(omega, W, lin.Bw);
        if (eroded.known_empty()) {
            throw SynthesisError(
                "compute_terminal_set: no robust terminal set exists for this W");
        }
        const HPolytope next = intersect(omega, affine_preimage(eroded, Ak));
        if (next.known_empty()) {
            throw SynthesisError(
                "compute_terminal_set: no robust terminal set exists for this W");
        }
        if (contains(next, omega) && contains(omega, next)) {
            log_debug("terminal set converged after ", iter + 1, " iterations, ",
                      next.num_rows(), " rows");
            return next;
        }
        omega = next;
    }
    throw SynthesisError("compute_terminal_set: no convergence within 500 iterations");
}

CertificateReport verify_assumption_margins(const TerminalIngredients& ing,
                                            const LinearDynamics& lin,
                                            const CostWeights& weights, const HPolytope& X,
                                            const HPolytope& U, const HPolytope& W) {
    CertificateReport report;
    const Eigen::MatrixXd Ak = lin.A + lin.B * ing.K;

    const Eigen::MatrixXd residual = ing.P - Ak.transpose() * ing.P * Ak -
                                     (weights.Q + ing.K.transpose() * weights.R * ing.K) -
                                     ing.Delta;
    report.decrease_residual_eigmin =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
            0.5 * (residual + residual.transpose()))
            .eigenvalues()
            .minCoeff();

    // h_{Ak Xf ⊕ Bw W}(d) = h_Xf(Ak'd) + h_W(Bw'd), row by row of Xf.
    report.rpi_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ing.Xf.num_rows(); ++i) {
        const Eigen::VectorXd row = ing.Xf.H().row(i).transpose();
        const SupportResult sx = support(ing.Xf, Ak.transpose() * row);
        const SupportResult sw = support(W, lin.Bw.transpose() * row);
        if (sx.status != LpStatus::Optimal || sw.status != LpStatus::Optimal) {
            report.rpi_margin = -std::numeric_limits<double>::infinity();
            break;
        }
        report.rpi_margin =
            std::min(report.rpi_margin, ing.Xf.g()(i) - sx.value - sw.value);
    }

    const auto inclusion_margin = [](const HPolytope& outer, const HPolytope& inner,
                                     const Eigen::MatrixXd& map) {
        double margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < outer.num_rows(); ++i) {
            const Eigen::VectorXd dir =
                map.transpose() * outer.H().row(i).transpose();
            const SupportResult s = support(inner, dir);
            if (s.status != LpStatus::Optimal) {
                return -std::numeric_limits<double>::infinity();
            }
            margin = std::min(margin, outer.g()(i) - s.value);
        }
        return margin;
    };
    const int n = static_cast<int>(lin.A.rows());
    report.state_margin = inclusion_margin(X, ing.Xf, Eigen::MatrixXd::Identity(n, n));
    report.input_margin = inclusion_margin(U, ing.Xf, ing.K);

    report.certified = report.decrease_residual_eigmin >= -kMarginTol &&
                       report.rpi_margin >= -kMarginTol &&
                       report.state_margin >= -kMarginTol &&
                       report.input_margin >= -kMarginTol;
    return report;
}

IssLevelSet iss_level_set(const TerminalIngredients& ing, const LinearDynamics& lin,
                          const CostWeights& weights, const HPolytope& W) {
    IssLevelSet level;
    level.P = ing.P;

    const double radius = bounding_radius(W);
    if (radius <= 0.0) return level;  // beta = 0 for W = {0}

    // Quadratic instantiation of the value decrease under disturbance: with
    // theta = 1/2 splitting the cross term against Q + Delta,
    //   V(Ak x + Bw w) - V(x) <= -(1/2) x'(Q + Delta)x + w' C w,
    //   C = Bw'[P + 2 P Ak (Q + Delta)^{-1} Ak' P] Bw,
    // so alpha3(s) = (1/2) lmin(Q + Delta) s^2 and rho(s) = lmax(C) s^2. The
    // resulting beta = alpha2(alpha3^{-1}(rho(r))) is an estimate, validated
    // empirically, not a certificate.
    const Eigen::MatrixXd Ak = lin.A + lin.B * ing.K;
    const Eigen::MatrixXd qd = weights.Q + ing.Delta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qd_eigs(qd);
    const double alpha3_coeff = 0.5 * qd_eigs.eigenvalues().minCoeff();
    if (alpha3_coeff <= 0.0) {
        throw SynthesisError("iss_level_set: Q + Delta has no positive decrease rate");
    }
    const Eigen::MatrixXd pak = ing.P * Ak;
    const Eigen::MatrixXd core =
        ing.P + 2.0 * pak * qd.ldlt().solve(pak.transpose());
    const Eigen::MatrixXd C = lin.Bw.transpose() * core * lin.Bw;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> c_eigs(0.5 * (C + C.transpose()));
    const double rho = c_eigs.eigenvalues().maxCoeff() * radius * radius;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> p_eigs(ing.P);
    level.beta = p_eigs.eigenvalues().maxCoeff() * rho / alpha3_coeff;
    return level;
}

TerminalIngredients synthesize_terminal_ingredients(const LinearDynamics& lin,
                                                    const CostWeights& weights,
                                                    const HPolytope& X, const HPolytope& U,
                                                    const HPolytope& W,
                                                    const Eigen::MatrixXd& Delta,
                                                    double lambda,
                                                    CertificateReport* report) {
    TerminalIngredients ing;
    ing.Delta = Delta;
    ing.lambda = lambda;
    ing.K = synthesize_gain(lin, weights);
    ing.P = solve_terminal_weight(lin, ing.K, weights, Delta, lambda);
    ing.Xf = compute_terminal_set(lin, ing.K, X, U, W);
    const CertificateReport cert = verify_assumption_margins(ing, lin, weights, X, U, W);
    if (report != nullptr) *report = cert;
    log_info("terminal synthesis: rho(Ak) = ", spectral_radius(lin.A + lin.B * ing.K),
             ", Xf rows = ", ing.Xf.num_rows(), ", certified = ", cert.certified);
    return ing;
}

}  // namespace pmpc

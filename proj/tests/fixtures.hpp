// Shared closed-loop fixture: the double-integrator example with unit state
// box, unit input box, 0.1 disturbance box and weights Q = diag(10,1), R = 1,
// S = I, Delta = I, lambda = 2. Ingredients are synthesized once and cached.
#pragma once

#include "pmpc/ocp.hpp"
#include "pmpc/synthesis.hpp"

namespace fixture {

inline pmpc::LinearDynamics plant() {
    pmpc::LinearDynamics lin;
    lin.A.resize(2, 2);
    lin.A << 1.0, 1.0, 0.0, 1.0;
    lin.B.resize(2, 1);
    lin.B << 0.5, 1.0;
    lin.Bw = Eigen::MatrixXd::Identity(2, 2);
    return lin;
}

inline pmpc::CostWeights weights() {
    pmpc::CostWeights w;
    w.Q.resize(2, 2);
    w.Q << 10.0, 0.0, 0.0, 1.0;
    w.R = Eigen::MatrixXd::Identity(1, 1);
    w.S = Eigen::MatrixXd::Identity(2, 2);
    return w;
}

inline const pmpc::HPolytope& state_box() {
    static const pmpc::HPolytope X = pmpc::HPolytope::cube(2, 1.0);
    return X;
}

inline const pmpc::HPolytope& input_box() {
    static const pmpc::HPolytope U = pmpc::HPolytope::cube(1, 1.0);
    return U;
}

inline const pmpc::HPolytope& disturbance_box() {
    static const pmpc::HPolytope W = pmpc::HPolytope::cube(2, 0.1);
    return W;
}

inline const pmpc::TerminalIngredients& ingredients() {
    static const pmpc::TerminalIngredients ing = [] {
        pmpc::CertificateReport cert;
        pmpc::TerminalIngredients result = pmpc::synthesize_terminal_ingredients(
            plant(), weights(), state_box(), input_box(), disturbance_box(),
            Eigen::MatrixXd::Identity(2, 2), 2.0, &cert);
        if (!cert.certified) throw std::runtime_error("fixture: certification failed");
        return result;
    }();
    return ing;
}

inline pmpc::OcpSpec spec(int horizon) {
    return pmpc::OcpSpec{pmpc::DynamicsModel::linear(plant()), horizon, state_box(),
                         input_box(), weights(), ingredients()};
}

}  // namespace fixture

#pragma once

#include <cstdint>
#include <vector>

#include "pmpc/controllers.hpp"
#include "pmpc/ocp.hpp"

namespace pmpc {

/// Disturbance truth generator. Every generated value is clipped into W
/// (Euclidean projection) and each clip is counted.
struct DisturbanceSpec {
    enum class Kind { Constant, Sinusoid, Uniform, Explicit };
    struct SinusoidChannel {
        double amplitude = 0.0;
        double period = 1.0;
        double phase = 0.0;
    };

    Kind kind = Kind::Uniform;
    Eigen::VectorXd constant_value;               // Constant
    std::vector<SinusoidChannel> channels;        // Sinusoid, one per coordinate
    std::uint64_t seed = 0;                       // Uniform
    std::vector<Eigen::VectorXd> explicit_values; // Explicit
};

struct Scenario {
    Eigen::VectorXd x0;
    int steps = 0;    // closed-loop length T
    int horizon = 1;  // preview length N
    ControllerKind controller = ControllerKind::Preview;
    DisturbanceSpec disturbance;
};

struct StepRecord {
    int k = 0;
    Eigen::VectorXd x, u, w;
    double stage_cost = 0.0;        // ||x||_Q^2 + ||u||_R^2, disturbance-free form
    double value = 0.0;             // optimal value of the step's solve
    SolveStatus status = SolveStatus::Infeasible;
    bool fallback = false;
    bool candidate_checked = false; // preview controller only
    bool candidate_feasible = false;
    double candidate_margin = 0.0;
    Eigen::VectorXd predicted_terminal_state;
    double window_norm = 0.0;       // stacked norm of the window seen this step
};

struct ClosedLoopTrace {
    std::vector<StepRecord> steps;
    Eigen::VectorXd final_state;
    double running_cost = 0.0;
    double max_violation = 0.0;
    int fallback_count = 0;
    int clip_count = 0;
};

/// `count` disturbance values, all inside W; clip_count reports how many raw
/// samples needed projection.
std::vector<Eigen::VectorXd> generate_disturbance(const DisturbanceSpec& spec,
                                                  const HPolytope& W, int count,
                                                  int* clip_count = nullptr);

/// Closed loop with exact preview: the same truth stream feeds the plant and
/// the controller's window. Throws InfeasibleError when the very first solve
/// is infeasible.
ClosedLoopTrace simulate(const Scenario& scenario, const OcpSpec& spec, const HPolytope& W);

/// Sum of the recorded disturbance-free stage costs.
double running_cost(const ClosedLoopTrace& trace);

struct CandidateCheck {
    bool feasible = false;
    double margin = 0.0;
};

/// Builds the shifted candidate (previous tail plus terminal law on the
/// predicted terminal state), rolls it out from the realized next state under
/// the next window, and checks every state, input and terminal constraint.
CandidateCheck check_candidate_feasibility(const OcpSpec& spec, const OcpSolution& solution,
                                           const Eigen::VectorXd& x_next,
                                           const PreviewWindow& window_next);

struct IssRecord {
    int k = 0;              // transition k -> k+1
    double delta_v = 0.0;
    double terminal_decrease = 0.0;  // ||x*(k+N|k)||_Delta^2
    double window_norm = 0.0;        // stacked norm of the k+1 window
    bool flagged = false;            // non-decrease outside the ultimate-bound set
};

/// Per-transition value decrease log over consecutive optimal steps; a soft
/// monitor, not an assertion.
std::vector<IssRecord> iss_decrease_log(const ClosedLoopTrace& trace,
                                        const TerminalIngredients& ing,
                                        const IssLevelSet& level);

struct ComparisonRow {
    std::uint64_t seed = 0;
    double cost_nominal = 0.0;
    double cost_drmpc = 0.0;
    double cost_preview = 0.0;
};

struct ComparisonResult {
    std::vector<ComparisonRow> rows;  // sorted by seed
    double mean_nominal = 0.0;
    double mean_drmpc = 0.0;
    double mean_preview = 0.0;
    // Traces for the first seed, for plot-ready CSV dumps.
    ClosedLoopTrace trace_nominal, trace_drmpc, trace_preview;
};

/// Paired comparison: per seed, one disturbance realization drives all three
/// controllers from the same x0. Runs fan out over `jobs` workers; results are
/// aggregated in seed order, so the table does not depend on scheduling.
ComparisonResult compare_controllers(const Scenario& base, const OcpSpec& spec,
                                     const HPolytope& W,
                                     const std::vector<std::uint64_t>& seeds, int jobs = 1);

}  // namespace pmpc

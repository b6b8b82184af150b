#include "pmpc/harness.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "pmpc/errors.hpp"
#include "pmpc/log.hpp"
#include "pmpc/qp.hpp"

namespace pmpc {

namespace {

// Uniform double in [0, 1) from the raw engine output; the engine is
// standardized, so streams are reproducible across platforms.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd project_onto(const HPolytope& W, const Eigen::VectorXd& v) {
    QpForm qp;
    const int q = static_cast<int>(v.size());
    qp.Hess = Eigen::MatrixXd::Identity(q, q);
    qp.lin = -2.0 * v;
    qp.const_term = v.squaredNorm();
    qp.ineqA = W.H();
    qp.ineqB = W.g();
    const QpSolution sol = solve_qp(qp);
    if (sol.status != QpStatus::Optimal) {
        throw ContractViolation("disturbance projection failed: W must be a nonempty PC-set");
    }
    return sol.u;
}

}  // namespace

std::vector<Eigen::VectorXd> generate_disturbance(const DisturbanceSpec& spec,
                                                  const HPolytope& W, int count,
                                                  int* clip_count) {
    const int q = W.ambient_dimension();
    int clips = 0;
    const auto admit = [&](Eigen::VectorXd w) {
        if (!W.contains_point(w)) {
            w = project_onto(W, w);
            ++clips;
        }
        return w;
    };

    std::vector<Eigen::VectorXd> values;
    values.reserve(static_cast<size_t>(count));
    switch (spec.kind) {
        case DisturbanceSpec::Kind::Constant: {
            if (spec.constant_value.size() != q) {
                throw ContractViolation("disturbance generator: constant value dimension");
            }
            const Eigen::VectorXd w = admit(spec.constant_value);
            // A clipped constant clips once per emitted value.
            if (clips > 0) clips = count;
            values.assign(static_cast<size_t>(count), w);
            break;
        }
        case DisturbanceSpec::Kind::Sinusoid: {
            if (static_cast<int>(spec.channels.size()) != q) {
                throw ContractViolation("disturbance generator: one sinusoid per channel");
            }
            for (int t = 0; t < count; ++t) {
                Eigen::VectorXd w(q);
                for (int j = 0; j < q; ++j) {
                    const auto& ch = spec.channels[static_cast<size_t>(j)];
                    w(j) = ch.amplitude *
                           std::sin(2.0 * std::numbers::pi * t / ch.period + ch.phase);
                }
                values.push_back(admit(std::move(w)));
            }
            break;
        }
        case DisturbanceSpec::Kind::Uniform: {
            Eigen::VectorXd lo(q), hi(q);
            for (int j = 0; j < q; ++j) {
                Eigen::VectorXd dir = Eigen::VectorXd::Zero(q);
                dir(j) = 1.0;
                const SupportResult shi = support(W, dir);
                dir(j) = -1.0;
                const SupportResult slo = support(W, dir);
                if (shi.status != LpStatus::Optimal || slo.status != LpStatus::Optimal) {
                    throw ContractViolation("disturbance generator: W must be bounded");
                }
                hi(j) = shi.value;
                lo(j) = -slo.value;
            }
            std::mt19937_64 rng(spec.seed);
            for (int t = 0; t < count; ++t) {
                Eigen::VectorXd w(q);
                bool inside = false;
                for (int attempt = 0; attempt < 100 && !inside; ++attempt) {
                    for (int j = 0; j < q; ++j) {
                        w(j) = lo(j) + (hi(j) - lo(j)) * uniform01(rng);
                    }
                    inside = W.contains_point(w);
                }
                values.push_back(admit(std::move(w)));
            }
            break;
        }
        case DisturbanceSpec::Kind::Explicit: {
            if (static_cast<int>(spec.explicit_values.size()) < count) {
                throw ContractViolation("disturbance generator: explicit sequence too short");
            }
            for (int t = 0; t < count; ++t) {
                if (spec.explicit_values[static_cast<size_t>(t)].size() != q) {
                    throw ContractViolation("disturbance generator: explicit value dimension");
                }
                values.push_back(admit(spec.explicit_values[static_cast<size_t>(t)]));
            }
            break;
        }
    }
    if (clip_count != nullptr) *clip_count = clips;
    if (clips > 0) log_info("disturbance generator clipped ", clips, " samples into W");
    return values;
}

ClosedLoopTrace simulate(const Scenario& scenario, const OcpSpec& spec, const HPolytope& W) {
    spec.validate();
    if (scenario.steps < 1) throw ContractViolation("simulate: need at least one step");
    if (scenario.horizon != spec.horizon) {
        throw ContractViolation("simulate: scenario horizon differs from the problem spec");
    }
    if (scenario.x0.size() != spec.model.state_dim()) {
        throw ContractViolation("simulate: x0 dimension mismatch");
    }

    const int T = scenario.steps;
    const int N = scenario.horizon;

    ClosedLoopTrace trace;
    const std::vector<Eigen::VectorXd> w_truth =
        generate_disturbance(scenario.disturbance, W, T + N, &trace.clip_count);

    Eigen::VectorXd x = scenario.x0;
    std::vector<Eigen::VectorXd> warm;  // shifted candidate from the last solve
    trace.steps.reserve(static_cast<size_t>(T));

    for (int k = 0; k < T; ++k) {
        PreviewWindow window;
        window.values.assign(w_truth.begin() + k, w_truth.begin() + k + N);

        ControlStep step;
        switch (scenario.controller) {
            case ControllerKind::Preview:
                step = preview_mpc_step(spec, x, window, warm.empty() ? nullptr : &warm);
                break;
            case ControllerKind::Nominal:
                step = nominal_mpc_step(spec, x);
                break;
            case ControllerKind::Drmpc:
                step = drmpc_step(spec, x, w_truth[static_cast<size_t>(k)]);
                break;
            case ControllerKind::TerminalLaw: {
                step.u = terminal_law(spec.terminal.K, x);
                step.solution.status = SolveStatus::Optimal;
                step.solution.value = x.dot(spec.terminal.P * x);
                break;
            }
        }
        if (k == 0 && (step.used_fallback ||
                       step.solution.status == SolveStatus::Infeasible)) {
            throw InfeasibleError("simulate: problem infeasible at k = 0");
        }

        StepRecord rec;
        rec.k = k;
        rec.x = x;
        rec.u = step.u;
        rec.w = w_truth[static_cast<size_t>(k)];
        rec.stage_cost = x.dot(spec.weights.Q * x) + step.u.dot(spec.weights.R * step.u);
        rec.value = step.solution.value;
        rec.status = step.solution.status;
        rec.fallback = step.used_fallback;
        rec.window_norm = window.stacked_norm();
        if (!step.solution.x_seq.empty()) {
            rec.predicted_terminal_state = step.solution.x_seq.back();
        }

        const Eigen::VectorXd x_next =
            step_dynamics(spec.model, x, step.u, w_truth[static_cast<size_t>(k)]);

        if (scenario.controller == ControllerKind::Preview && !step.used_fallback &&
            step.solution.status == SolveStatus::Optimal) {
            PreviewWindow window_next;
            window_next.values.assign(w_truth.begin() + k + 1, w_truth.begin() + k + 1 + N);
            const CandidateCheck check =
                check_candidate_feasibility(spec, step.solution, x_next, window_next);
            rec.candidate_checked = true;
            rec.candidate_feasible = check.feasible;
            rec.candidate_margin = check.margin;
            // Shifted candidate doubles as the next warm start.
            warm.assign(step.solution.u_seq.begin() + 1, step.solution.u_seq.end());
            warm.push_back(terminal_law(spec.terminal.K, step.solution.x_seq.back()));
        } else {
            warm.clear();
        }

        if (step.used_fallback) ++trace.fallback_count;
        const auto violation = [&](const HPolytope& set, const Eigen::VectorXd& v) {
            if (set.num_rows() == 0) return 0.0;
            return std::max(0.0, (set.H() * v - set.g()).maxCoeff());
        };
        trace.max_violation = std::max(
            {trace.max_violation, violation(spec.X, x), violation(spec.U, step.u)});

        trace.steps.push_back(std::move(rec));
        x = x_next;
    }
    trace.final_state = x;
    trace.running_cost = running_cost(trace);
    return trace;
}

double running_cost(const ClosedLoopTrace& trace) {
    double total = 0.0;
    for (const auto& rec : trace.steps) total += rec.stage_cost;
    return total;
}

CandidateCheck check_candidate_feasibility(const OcpSpec& spec, const OcpSolution& solution,
                                           const Eigen::VectorXd& x_next,
                                           const PreviewWindow& window_next) {
    const int N = spec.horizon;
    if (static_cast<int>(solution.u_seq.size()) != N ||
        static_cast<int>(solution.x_seq.size()) != N + 1) {
        throw ContractViolation("check_candidate_feasibility: malformed solution");
    }
    if (window_next.horizon() != N) {
        throw ContractViolation("check_candidate_feasibility: window length mismatch");
    }

    std::vector<Eigen::VectorXd> candidate(solution.u_seq.begin() + 1, solution.u_seq.end());
    candidate.push_back(terminal_law(spec.terminal.K, solution.x_seq.back()));

    double margin = std::numeric_limits<double>::infinity();
    const auto update = [&margin](const HPolytope& set, const Eigen::VectorXd& v) {
        if (set.num_rows() == 0) return;
        margin = std::min(margin, (set.g() - set.H() * v).minCoeff());
    };

    Eigen::VectorXd x = x_next;
    for (int i = 0; i < N; ++i) {
        update(spec.X, x);
        update(spec.U, candidate[static_cast<size_t>(i)]);
        x = step_dynamics(spec.model, x, candidate[static_cast<size_t>(i)],
                          window_next.values[static_cast<size_t>(i)]);
    }
    update(spec.terminal.Xf, x);

    return {margin >= -1e-7, margin};
}

std::vector<IssRecord> iss_decrease_log(const ClosedLoopTrace& trace,
                                        const TerminalIngredients& ing,
                                        const IssLevelSet& level) {
    std::vector<IssRecord> records;
    for (size_t k = 0; k + 1 < trace.steps.size(); ++k) {
        const StepRecord& cur = trace.steps[k];
        const StepRecord& next = trace.steps[k + 1];
        if (cur.status != SolveStatus::Optimal || next.status != SolveStatus::Optimal) {
            continue;
        }
        IssRecord rec;
        rec.k = cur.k;
        rec.delta_v = next.value - cur.value;
        if (cur.predicted_terminal_state.size() > 0) {
            rec.terminal_decrease =
                cur.predicted_terminal_state.dot(ing.Delta * cur.predicted_terminal_state);
        }
        rec.window_norm = next.window_norm;
        rec.flagged = rec.delta_v >= 0.0 && cur.predicted_terminal_state.size() > 0 &&
                      !level.contains(cur.predicted_terminal_state);
        records.push_back(rec);
    }
    return records;
}

ComparisonResult compare_controllers(const Scenario& base, const OcpSpec& spec,
                                     const HPolytope& W,
                                     const std::vector<std::uint64_t>& seeds, int jobs) {
    if (seeds.empty()) throw ContractViolation("compare_controllers: no seeds");

    struct SeedOutcome {
        ComparisonRow row;
        ClosedLoopTrace nominal, drmpc, preview;
    };
    std::vector<SeedOutcome> outcomes(seeds.size());

    const auto run_seed = [&](size_t idx) {
        Scenario scenario = base;
        scenario.disturbance.seed = seeds[idx];

        // One realization per seed, shared verbatim by all three controllers.
        const std::vector<Eigen::VectorXd> stream = generate_disturbance(
            scenario.disturbance, W, scenario.steps + scenario.horizon, nullptr);
        Scenario paired = scenario;
        paired.disturbance.kind = DisturbanceSpec::Kind::Explicit;
        paired.disturbance.explicit_values = stream;

        const std::vector<Eigen::VectorXd> check = generate_disturbance(
            paired.disturbance, W, paired.steps + paired.horizon, nullptr);
        for (size_t t = 0; t < stream.size(); ++t) {
            if ((stream[t] - check[t]).lpNorm<Eigen::Infinity>() != 0.0) {
                throw ContractViolation("compare_controllers: disturbance streams diverged");
            }
        }

        SeedOutcome& out = outcomes[idx];
        out.row.seed = seeds[idx];
        paired.controller = ControllerKind::Nominal;
        out.nominal = simulate(paired, spec, W);
        paired.controller = ControllerKind::Drmpc;
        out.drmpc = simulate(paired, spec, W);
        paired.controller = ControllerKind::Preview;
        out.preview = simulate(paired, spec, W);
        out.row.cost_nominal = out.nominal.running_cost;
        out.row.cost_drmpc = out.drmpc.running_cost;
        out.row.cost_preview = out.preview.running_cost;
    };

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
    if (workers == 1) {
        for (size_t i = 0; i < seeds.size(); ++i) run_seed(i);
    } else {
        std::atomic<size_t> cursor{0};
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        pool.reserve(static_cast<size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    const size_t idx = cursor.fetch_add(1);
                    if (idx >= seeds.size()) return;
                    try {
                        run_seed(idx);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }

    ComparisonResult result;
    result.rows.reserve(outcomes.size());
    for (auto& out : outcomes) {
        result.rows.push_back(out.row);
        result.mean_nominal += out.row.cost_nominal;
        result.mean_drmpc += out.row.cost_drmpc;
        result.mean_preview += out.row.cost_preview;
    }
    const double count = static_cast<double>(outcomes.size());
    result.mean_nominal /= count;
    result.mean_drmpc /= count;
    result.mean_preview /= count;
    result.trace_nominal = std::move(outcomes.front().nominal);
    result.trace_drmpc = std::move(outcomes.front().drmpc);
    result.trace_preview = std::move(outcomes.front().preview);
    return result;
}

}  // namespace pmpc

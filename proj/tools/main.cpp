// Command-line front end: offline terminal-ingredient synthesis, single
// finite-horizon solves, closed-loop simulation, and paired controller
// comparison. JSON in, JSON/CSV out.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>

#include "pmpc/controllers.hpp"
#include "pmpc/errors.hpp"
#include "pmpc/harness.hpp"
#include "pmpc/io.hpp"
#include "pmpc/log.hpp"
#include "pmpc/ocp.hpp"
#include "pmpc/synthesis.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSynthesis = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitIterationLimit = 5;

namespace fs = std::filesystem;

struct CommonPaths {
    std::string system;
    std::string ingredients;
    std::string scenario;
    std::string out = ".";
};

pmpc::TerminalIngredients resolve_ingredients(const pmpc::SystemDescription& system,
                                              const std::string& ingredients_path) {
    if (!ingredients_path.empty()) {
        return pmpc::load_ingredients(ingredients_path).ingredients;
    }
    pmpc::log_info("no ingredients file given, synthesizing");
    pmpc::CertificateReport cert;
    pmpc::TerminalIngredients ing = pmpc::synthesize_terminal_ingredients(
        pmpc::jacobian_linearize(system.model,
                                 Eigen::VectorXd::Zero(system.model.state_dim()),
                                 Eigen::VectorXd::Zero(system.model.input_dim()),
                                 Eigen::VectorXd::Zero(system.model.disturbance_dim())),
        system.weights, system.X, system.U, system.W, system.Delta, system.lambda, &cert);
    if (!cert.certified) {
        throw pmpc::SynthesisError("synthesized ingredients failed certification");
    }
    return ing;
}

pmpc::OcpSpec make_spec(const pmpc::SystemDescription& system,
                        pmpc::TerminalIngredients ing, int horizon) {
    pmpc::OcpSpec spec{system.model, horizon, system.X, system.U, system.weights,
                       std::move(ing)};
    spec.validate();
    return spec;
}

int run_synth(const CommonPaths& paths, std::optional<double> lambda_override) {
    pmpc::SystemDescription system = pmpc::load_system(paths.system);
    if (lambda_override) system.lambda = *lambda_override;
    if (system.lambda < 1.0) {
        throw pmpc::SynthesisError("lambda must be >= 1");
    }

    const pmpc::LinearDynamics lin = pmpc::jacobian_linearize(
        system.model, Eigen::VectorXd::Zero(system.model.state_dim()),
        Eigen::VectorXd::Zero(system.model.input_dim()),
        Eigen::VectorXd::Zero(system.model.disturbance_dim()));

    for (const auto& [name, set] :
         {std::pair{"X", &system.X}, {"U", &system.U}, {"W", &system.W}}) {
        const pmpc::PcReport report = pmpc::validate_pc_set(*set);
        if (!report.pass()) {
            throw pmpc::SynthesisError(std::string(name) + " is not a PC-set");
        }
    }

    pmpc::CertificateReport cert;
    const pmpc::TerminalIngredients ing = pmpc::synthesize_terminal_ingredients(
        lin, system.weights, system.X, system.U, system.W, system.Delta, system.lambda,
        &cert);

    fs::create_directories(paths.out);
    pmpc::save_ingredients(fs::path(paths.out) / "ingredients.json", ing, cert);
    pmpc::save_certificate_text(fs::path(paths.out) / "certificate.txt", cert, ing);
    if (ing.Xf.ambient_dimension() == 2) {
        pmpc::save_boundary_csv(fs::path(paths.out) / "xf_boundary.csv", ing.Xf);
    }
    std::cout << "ingredients written to " << paths.out
              << (cert.certified ? " (certified)" : " (NOT certified)") << "\n";
    if (!cert.certified) return kExitSynthesis;
    return kExitOk;
}

int run_solve(const CommonPaths& paths, const std::string& point_path, int horizon) {
    const pmpc::SystemDescription system = pmpc::load_system(paths.system);
    const pmpc::OcpSpec spec =
        make_spec(system, resolve_ingredients(system, paths.ingredients), horizon);
    const pmpc::SolvePoint point =
        pmpc::load_point(point_path, system.model.state_dim(),
                         system.model.disturbance_dim(), horizon);

    const pmpc::OcpSolution solution = pmpc::solve_ocp(spec, point.x0, point.window);
    fs::create_directories(paths.out);
    pmpc::save_solution(fs::path(paths.out) / "solution.json", solution);
    std::cout << "status " << pmpc::to_string(solution.status) << ", value "
              << solution.value << "\n";
    if (solution.status == pmpc::SolveStatus::Infeasible) return kExitInfeasible;
    if (solution.status == pmpc::SolveStatus::MaxIter) return kExitIterationLimit;
    return kExitOk;
}

int run_simulate(const CommonPaths& paths, const std::string& controller_override) {
    const pmpc::SystemDescription system = pmpc::load_system(paths.system);
    pmpc::Scenario scenario = pmpc::load_scenario(
        paths.scenario, system.model.state_dim(), system.model.disturbance_dim());
    if (!controller_override.empty()) {
        scenario.controller = pmpc::controller_from_string(controller_override);
    }
    const pmpc::OcpSpec spec = make_spec(
        system, resolve_ingredients(system, paths.ingredients), scenario.horizon);

    const pmpc::ClosedLoopTrace trace = pmpc::simulate(scenario, spec, system.W);

    fs::create_directories(paths.out);
    pmpc::save_trace_csv(fs::path(paths.out) / "trace.csv", trace);
    pmpc::save_summary(fs::path(paths.out) / "summary.json", trace);
    const pmpc::IssLevelSet level = pmpc::iss_level_set(
        spec.terminal, spec.model.is_linear()
                           ? spec.model.linear_dynamics()
                           : pmpc::jacobian_linearize(
                                 spec.model, Eigen::VectorXd::Zero(spec.model.state_dim()),
                                 Eigen::VectorXd::Zero(spec.model.input_dim()),
                                 Eigen::VectorXd::Zero(spec.model.disturbance_dim())),
        spec.weights, system.W);
    pmpc::save_iss_log_csv(fs::path(paths.out) / "iss_log.csv",
                           pmpc::iss_decrease_log(trace, spec.terminal, level));
    std::cout << "running cost " << trace.running_cost << ", fallbacks "
              << trace.fallback_count << "\n";
    return kExitOk;
}

int run_compare(const CommonPaths& paths, int seed_count, int jobs) {
    const pmpc::SystemDescription system = pmpc::load_system(paths.system);
    pmpc::Scenario scenario = pmpc::load_scenario(
        paths.scenario, system.model.state_dim(), system.model.disturbance_dim());
    const pmpc::OcpSpec spec = make_spec(
        system, resolve_ingredients(system, paths.ingredients), scenario.horizon);

    std::vector<std::uint64_t> seeds = pmpc::load_seeds(paths.scenario);
    if (seed_count > 0) {
        seeds.clear();
        for (int s = 1; s <= seed_count; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (seeds.empty()) seeds = {1};

    const pmpc::ComparisonResult result =
        pmpc::compare_controllers(scenario, spec, system.W, seeds, jobs);

    fs::create_directories(paths.out);
    pmpc::save_comparison_csv(fs::path(paths.out) / "table.csv", result);
    const std::string table = pmpc::format_comparison_table(result);
    {
        std::ofstream out(fs::path(paths.out) / "table.txt");
        out << table;
    }
    pmpc::save_trace_csv(fs::path(paths.out) / "trace_nominal.csv", result.trace_nominal);
    pmpc::save_trace_csv(fs::path(paths.out) / "trace_drmpc.csv", result.trace_drmpc);
    pmpc::save_trace_csv(fs::path(paths.out) / "trace_preview.csv", result.trace_preview);
    std::cout << table;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained MPC with disturbance preview"};
    app.require_subcommand(1);

    CommonPaths paths;
    std::optional<double> lambda_override;
    std::string point_path;
    std::string controller_override;
    int horizon = 5;
    int seed_count = 0;
    int jobs = 1;

    CLI::App* synth = app.add_subcommand("synth", "compute and certify terminal ingredients");
    synth->add_option("--system", paths.system, "system JSON")->required();
    synth->add_option("--out", paths.out, "output directory");
    synth->add_option("--lambda", lambda_override, "override the lambda multiplier");

    CLI::App* solve = app.add_subcommand("solve", "solve one finite-horizon problem");
    solve->add_option("--system", paths.system, "system JSON")->required();
    solve->add_option("--ingredients", paths.ingredients, "ingredients JSON");
    solve->add_option("--point", point_path, "point JSON with x0 and window")->required();
    solve->add_option("--horizon", horizon, "prediction horizon");
    solve->add_option("--out", paths.out, "output directory");

    CLI::App* simulate = app.add_subcommand("simulate", "run one closed loop");
    simulate->add_option("--system", paths.system, "system JSON")->required();
    simulate->add_option("--ingredients", paths.ingredients, "ingredients JSON");
    simulate->add_option("--scenario", paths.scenario, "scenario JSON")->required();
    simulate->add_option("--controller", controller_override,
                         "preview | nominal | drmpc (overrides the scenario)");
    simulate->add_option("--out", paths.out, "output directory");

    CLI::App* compare = app.add_subcommand("compare", "paired controller comparison");
    compare->add_option("--system", paths.system, "system JSON")->required();
    compare->add_option("--ingredients", paths.ingredients, "ingredients JSON");
    compare->add_option("--scenario", paths.scenario, "scenario JSON")->required();
    compare->add_option("--seeds", seed_count, "use seeds 1..N (overrides the file)");
    compare->add_option("--jobs", jobs, "worker threads for the seed batch");
    compare->add_option("--out", paths.out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(paths, lambda_override);
        if (solve->parsed()) return run_solve(paths, point_path, horizon);
        if (simulate->parsed()) return run_simulate(paths, controller_override);
        if (compare->parsed()) return run_compare(paths, seed_count, jobs);
    } catch (const pmpc::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const pmpc::SynthesisError& e) {
        std::cerr << "synthesis error: " << e.what() << "\n";
        return kExitSynthesis;
    } catch (const pmpc::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const pmpc::ContractViolation& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}

#pragma once

#include <filesystem>
#include <string>

#include "pmpc/harness.hpp"
#include "pmpc/model.hpp"
#include "pmpc/synthesis.hpp"

namespace pmpc {

/// A plant plus everything the offline stage needs: constraint sets, weights,
/// and optional Delta/lambda overrides.
struct SystemDescription {
    DynamicsModel model;
    HPolytope X, U, W;
    CostWeights weights;
    Eigen::MatrixXd Delta;  // defaults to I
    double lambda = 2.0;
};

SystemDescription load_system(const std::filesystem::path& path);

struct IngredientsFile {
    TerminalIngredients ingredients;
    CertificateReport certificate;
};

void save_ingredients(const std::filesystem::path& path, const TerminalIngredients& ing,
                      const CertificateReport& cert);
IngredientsFile load_ingredients(const std::filesystem::path& path);

Scenario load_scenario(const std::filesystem::path& path, int state_dim,
                       int disturbance_dim);
/// Seeds listed in the scenario file (absent -> empty).
std::vector<std::uint64_t> load_seeds(const std::filesystem::path& path);

struct SolvePoint {
    Eigen::VectorXd x0;
    PreviewWindow window;
};
SolvePoint load_point(const std::filesystem::path& path, int state_dim, int disturbance_dim,
                      int horizon);

void save_solution(const std::filesystem::path& path, const OcpSolution& solution);

/// Columns: k, x_1..x_n, u_1..u_m, w_1..w_q, stage_cost, value, status,
/// candidate_feasible (1/0, blank when not checked).
void save_trace_csv(const std::filesystem::path& path, const ClosedLoopTrace& trace);

void save_summary(const std::filesystem::path& path, const ClosedLoopTrace& trace);

void save_iss_log_csv(const std::filesystem::path& path, const std::vector<IssRecord>& log);

void save_comparison_csv(const std::filesystem::path& path, const ComparisonResult& result);

/// Three-column aligned-text table of mean running costs.
std::string format_comparison_table(const ComparisonResult& result);

/// 2-D boundary of a polytope as x,y rows (support sweep, 1 degree).
void save_boundary_csv(const std::filesystem::path& path, const HPolytope& set);

void save_certificate_text(const std::filesystem::path& path, const CertificateReport& cert,
                           const TerminalIngredients& ing);

/// Polytope <-> JSON {"H": [[...],...], "g": [...]} or {"box": {"lo", "hi"}}.
HPolytope polytope_from_json_file(const std::filesystem::path& path);

}  // namespace pmpc

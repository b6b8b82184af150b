#include "pmpc/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "pmpc/errors.hpp"

namespace pmpc {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

// Matrices are accepted both as flat row-major arrays and as nested rows.
Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols, const std::string& name) {
    Eigen::MatrixXd M(rows, cols);
    if (!j.is_array()) throw ParseError(name + ": expected an array");
    if (!j.empty() && j.front().is_array()) {
        if (static_cast<int>(j.size()) != rows) {
            throw ParseError(name + ": expected " + std::to_string(rows) + " rows");
        }
        for (int i = 0; i < rows; ++i) {
            if (static_cast<int>(j[i].size()) != cols) {
                throw ParseError(name + ": row " + std::to_string(i) + " has wrong length");
            }
            for (int k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
        }
        return M;
    }
    if (static_cast<int>(j.size()) != rows * cols) {
        throw ParseError(name + ": expected " + std::to_string(rows * cols) + " entries");
    }
    for (int i = 0; i < rows; ++i) {
        for (int k = 0; k < cols; ++k) M(i, k) = j[i * cols + k].get<double>();
    }
    return M;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& name) {
    if (!j.is_array()) throw ParseError(name + ": expected an array");
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

HPolytope polytope_from_json(const json& j, const std::string& name) {
    if (j.contains("box")) {
        const json& box = j.at("box");
        const Eigen::VectorXd lo = vector_from_json(box.at("lo"), name + ".box.lo");
        const Eigen::VectorXd hi = vector_from_json(box.at("hi"), name + ".box.hi");
        return HPolytope::box(lo, hi);
    }
    if (j.contains("H") && j.contains("g")) {
        const Eigen::VectorXd g = vector_from_json(j.at("g"), name + ".g");
        const int rows = static_cast<int>(g.size());
        const json& hj = j.at("H");
        int cols = 0;
        if (hj.is_array() && !hj.empty() && hj.front().is_array()) {
            cols = static_cast<int>(hj.front().size());
        } else if (hj.is_array() && rows > 0) {
            cols = static_cast<int>(hj.size()) / rows;
        }
        if (cols <= 0) throw ParseError(name + ": cannot infer H shape");
        return HPolytope::from_inequalities(matrix_from_json(hj, rows, cols, name + ".H"), g);
    }
    throw ParseError(name + ": expected {\"H\",\"g\"} or {\"box\"}");
}

json polytope_to_json(const HPolytope& set) {
    return json{{"H", matrix_to_json(set.H())}, {"g", vector_to_json(set.g())}};
}

// Named nonlinear plants available to system files.
DynamicsModel builtin_nonlinear(const std::string& name, const json& params) {
    if (name == "pendulum") {
        // Explicit-Euler damped pendulum: state (angle, rate), torque input,
        // additive rate disturbance.
        const double dt = params.value("dt", 0.05);
        const double gravity_over_length = params.value("gravity_over_length", 9.81);
        const double damping = params.value("damping", 0.1);
        auto f = [dt, gravity_over_length, damping](const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& u,
                                                    const Eigen::VectorXd& w) {
            Eigen::VectorXd next(2);
            next(0) = x(0) + dt * x(1);
            next(1) = x(1) + dt * (-gravity_over_length * std::sin(x(0)) -
                                   damping * x(1) + u(0) + w(0));
            return next;
        };
        auto jac = [dt, gravity_over_length, damping](const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd&,
                                                      const Eigen::VectorXd&) {
            LinearDynamics lin;
            lin.A.resize(2, 2);
            lin.A << 1.0, dt, -dt * gravity_over_length * std::cos(x(0)),
                1.0 - dt * damping;
            lin.B.resize(2, 1);
            lin.B << 0.0, dt;
            lin.Bw.resize(2, 1);
            lin.Bw << 0.0, dt;
            return lin;
        };
        return DynamicsModel::nonlinear(2, 1, 1, std::move(f), std::move(jac));
    }
    throw ParseError("unknown builtin nonlinear model: " + name);
}

}  // namespace

SystemDescription load_system(const std::filesystem::path& path) {
    const json j = read_json(path);
    SystemDescription desc;

    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    const int q = j.at("q").get<int>();
    if (n <= 0 || m <= 0 || q <= 0) throw ParseError("system: dimensions must be positive");

    if (j.contains("nonlinear")) {
        desc.model = builtin_nonlinear(j.at("nonlinear").get<std::string>(),
                                       j.value("params", json::object()));
        if (desc.model.state_dim() != n || desc.model.input_dim() != m ||
            desc.model.disturbance_dim() != q) {
            throw ParseError("system: builtin model dimensions disagree with (n,m,q)");
        }
    } else {
        LinearDynamics lin;
        lin.A = matrix_from_json(j.at("A"), n, n, "A");
        lin.B = matrix_from_json(j.at("B"), n, m, "B");
        lin.Bw = matrix_from_json(j.at("Bw"), n, q, "Bw");
        desc.model = DynamicsModel::linear(std::move(lin));
    }

    desc.X = polytope_from_json(j.at("X"), "X");
    desc.U = polytope_from_json(j.at("U"), "U");
    desc.W = polytope_from_json(j.at("W"), "W");
    desc.weights.Q = matrix_from_json(j.at("Q"), n, n, "Q");
    desc.weights.R = matrix_from_json(j.at("R"), m, m, "R");
    desc.weights.S = matrix_from_json(j.at("S"), q, q, "S");
    desc.weights.validate(n, m, q);

    desc.Delta = j.contains("Delta") ? matrix_from_json(j.at("Delta"), n, n, "Delta")
                                     : Eigen::MatrixXd::Identity(n, n);
    desc.lambda = j.value("lambda", 2.0);

    if (desc.X.ambient_dimension() != n || desc.U.ambient_dimension() != m ||
        desc.W.ambient_dimension() != q) {
        throw ParseError("system: constraint set dimensions disagree with (n,m,q)");
    }
    return desc;
}

void save_ingredients(const std::filesystem::path& path, const TerminalIngredients& ing,
                      const CertificateReport& cert) {
    json j;
    j["K"] = matrix_to_json(ing.K);
    j["P"] = matrix_to_json(ing.P);
    j["Delta"] = matrix_to_json(ing.Delta);
    j["lambda"] = ing.lambda;
    j["Xf"] = polytope_to_json(ing.Xf);
    j["certificate"] = {{"decrease_residual_eigmin", cert.decrease_residual_eigmin},
                        {"rpi_margin", cert.rpi_margin},
                        {"state_margin", cert.state_margin},
                        {"input_margin", cert.input_margin},
                        {"certified", cert.certified}};
    write_json(path, j);
}

IngredientsFile load_ingredients(const std::filesystem::path& path) {
    const json j = read_json(path);
    IngredientsFile file;

    const json& pj = j.at("P");
    const int n = static_cast<int>(pj.size());
    if (n <= 0 || !pj.front().is_array()) throw ParseError("ingredients: malformed P");
    file.ingredients.P = matrix_from_json(pj, n, n, "P");
    const json& kj = j.at("K");
    const int m = static_cast<int>(kj.size());
    file.ingredients.K = matrix_from_json(kj, m, n, "K");
    file.ingredients.Delta = matrix_from_json(j.at("Delta"), n, n, "Delta");
    file.ingredients.lambda = j.at("lambda").get<double>();
    file.ingredients.Xf = polytope_from_json(j.at("Xf"), "Xf");

    if (j.contains("certificate")) {
        const json& c = j.at("certificate");
        file.certificate.decrease_residual_eigmin =
            c.value("decrease_residual_eigmin", 0.0);
        file.certificate.rpi_margin = c.value("rpi_margin", 0.0);
        file.certificate.state_margin = c.value("state_margin", 0.0);
        file.certificate.input_margin = c.value("input_margin", 0.0);
        file.certificate.certified = c.value("certified", false);
    }
    return file;
}

Scenario load_scenario(const std::filesystem::path& path, int state_dim,
                       int disturbance_dim) {
    const json j = read_json(path);
    Scenario scenario;
    scenario.x0 = vector_from_json(j.at("x0"), "x0");
    if (scenario.x0.size() != state_dim) throw ParseError("scenario: x0 dimension mismatch");
    scenario.steps = j.at("T").get<int>();
    scenario.horizon = j.at("N").get<int>();
    if (scenario.steps < 1 || scenario.horizon < 1) {
        throw ParseError("scenario: T and N must be >= 1");
    }
    scenario.controller = controller_from_string(j.value("controller", "preview"));

    const json& d = j.at("disturbance");
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "constant") {
        scenario.disturbance.kind = DisturbanceSpec::Kind::Constant;
        scenario.disturbance.constant_value = vector_from_json(d.at("value"), "disturbance.value");
    } else if (kind == "sinusoid") {
        scenario.disturbance.kind = DisturbanceSpec::Kind::Sinusoid;
        for (const auto& cj : d.at("channels")) {
            DisturbanceSpec::SinusoidChannel ch;
            ch.amplitude = cj.at("amplitude").get<double>();
            ch.period = cj.at("period").get<double>();
            ch.phase = cj.value("phase", 0.0);
            if (ch.period <= 0.0) throw ParseError("scenario: sinusoid period must be > 0");
            scenario.disturbance.channels.push_back(ch);
        }
        if (static_cast<int>(scenario.disturbance.channels.size()) != disturbance_dim) {
            throw ParseError("scenario: one sinusoid channel per disturbance coordinate");
        }
    } else if (kind == "uniform") {
        scenario.disturbance.kind = DisturbanceSpec::Kind::Uniform;
        scenario.disturbance.seed = d.value("seed", 0ULL);
    } else if (kind == "explicit") {
        scenario.disturbance.kind = DisturbanceSpec::Kind::Explicit;
        for (const auto& vj : d.at("values")) {
            scenario.disturbance.explicit_values.push_back(
                vector_from_json(vj, "disturbance.values[]"));
        }
    } else {
        throw ParseError("scenario: unknown disturbance kind " + kind);
    }
    return scenario;
}

std::vector<std::uint64_t> load_seeds(const std::filesystem::path& path) {
    const json j = read_json(path);
    std::vector<std::uint64_t> seeds;
    if (j.contains("seeds")) {
        for (const auto& s : j.at("seeds")) seeds.push_back(s.get<std::uint64_t>());
    }
    return seeds;
}

SolvePoint load_point(const std::filesystem::path& path, int state_dim, int disturbance_dim,
                      int horizon) {
    const json j = read_json(path);
    SolvePoint point;
    point.x0 = vector_from_json(j.at("x0"), "x0");
    if (point.x0.size() != state_dim) throw ParseError("point: x0 dimension mismatch");
    if (j.contains("window")) {
        for (const auto& wj : j.at("window")) {
            point.window.values.push_back(vector_from_json(wj, "window[]"));
            if (point.window.values.back().size() != disturbance_dim) {
                throw ParseError("point: window element dimension mismatch");
            }
        }
    }
    if (point.window.horizon() == 0) {
        point.window = PreviewWindow::zero(horizon, disturbance_dim);
    }
    if (point.window.horizon() != horizon) {
        throw ParseError("point: window length must equal the horizon");
    }
    return point;
}

void save_solution(const std::filesystem::path& path, const OcpSolution& solution) {
    json j;
    j["status"] = to_string(solution.status);
    j["value"] = solution.value;
    j["kkt_residual"] = solution.kkt_residual;
    j["linearization_passes"] = solution.linearization_passes;
    json u = json::array();
    for (const auto& ui : solution.u_seq) u.push_back(vector_to_json(ui));
    json x = json::array();
    for (const auto& xi : solution.x_seq) x.push_back(vector_to_json(xi));
    j["u"] = std::move(u);
    j["x"] = std::move(x);
    write_json(path, j);
}

void save_trace_csv(const std::filesystem::path& path, const ClosedLoopTrace& trace) {
    std::ostringstream out;
    out << std::setprecision(17);
    if (trace.steps.empty()) throw ContractViolation("save_trace_csv: empty trace");
    const auto& first = trace.steps.front();
    out << "k";
    for (int i = 0; i < first.x.size(); ++i) out << ",x_" << (i + 1);
    for (int i = 0; i < first.u.size(); ++i) out << ",u_" << (i + 1);
    for (int i = 0; i < first.w.size(); ++i) out << ",w_" << (i + 1);
    out << ",stage_cost,value,status,candidate_feasible\n";
    for (const auto& rec : trace.steps) {
        out << rec.k;
        for (int i = 0; i < rec.x.size(); ++i) out << "," << rec.x(i);
        for (int i = 0; i < rec.u.size(); ++i) out << "," << rec.u(i);
        for (int i = 0; i < rec.w.size(); ++i) out << "," << rec.w(i);
        out << "," << rec.stage_cost << "," << rec.value << "," << to_string(rec.status)
            << ",";
        if (rec.candidate_checked) out << (rec.candidate_feasible ? 1 : 0);
        out << "\n";
    }
    write_text(path, out.str());
}

void save_summary(const std::filesystem::path& path, const ClosedLoopTrace& trace) {
    json j;
    j["steps"] = trace.steps.size();
    j["running_cost"] = trace.running_cost;
    j["max_violation"] = trace.max_violation;
    j["fallback_count"] = trace.fallback_count;
    j["clip_count"] = trace.clip_count;
    j["final_state"] = vector_to_json(trace.final_state);
    write_json(path, j);
}

void save_iss_log_csv(const std::filesystem::path& path, const std::vector<IssRecord>& log) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "k,delta_v,terminal_decrease,window_norm,flagged\n";
    for (const auto& rec : log) {
        out << rec.k << "," << rec.delta_v << "," << rec.terminal_decrease << ","
            << rec.window_norm << "," << (rec.flagged ? 1 : 0) << "\n";
    }
    write_text(path, out.str());
}

void save_comparison_csv(const std::filesystem::path& path, const ComparisonResult& result) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "seed,cost_nominal,cost_drmpc,cost_preview\n";
    for (const auto& row : result.rows) {
        out << row.seed << "," << row.cost_nominal << "," << row.cost_drmpc << ","
            << row.cost_preview << "\n";
    }
    out << "mean," << result.mean_nominal << "," << result.mean_drmpc << ","
        << result.mean_preview << "\n";
    write_text(path, out.str());
}

std::string format_comparison_table(const ComparisonResult& result) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << std::left << std::setw(22) << "Algorithms" << std::setw(14) << "Nominal MPC"
        << std::setw(14) << "DRMPC" << std::setw(14) << "Preview MPC" << "\n";
    out << std::left << std::setw(22) << "Mean running cost" << std::setw(14)
        << result.mean_nominal << std::setw(14) << result.mean_drmpc << std::setw(14)
        << result.mean_preview << "\n";
    out << "(" << result.rows.size() << " paired seeds)\n";
    return out.str();
}

void save_boundary_csv(const std::filesystem::path& path, const HPolytope& set) {
    const std::vector<Eigen::Vector2d> boundary = boundary_2d(set);
    std::ostringstream out;
    out << std::setprecision(17);
    out << "x,y\n";
    for (const auto& v : boundary) out << v(0) << "," << v(1) << "\n";
    write_text(path, out.str());
}

void save_certificate_text(const std::filesystem::path& path, const CertificateReport& cert,
                           const TerminalIngredients& ing) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "terminal certificate: " << (cert.certified ? "PASS" : "FAIL") << "\n";
    out << "decrease_residual_eigmin = " << cert.decrease_residual_eigmin << "\n";
    out << "rpi_margin               = " << cert.rpi_margin << "\n";
    out << "state_margin             = " << cert.state_margin << "\n";
    out << "input_margin             = " << cert.input_margin << "\n";
    out << "lambda                   = " << ing.lambda << "\n";
    out << "terminal set rows        = " << ing.Xf.num_rows() << "\n";
    write_text(path, out.str());
}

HPolytope polytope_from_json_file(const std::filesystem::path& path) {
    return polytope_from_json(read_json(path), path.string());
}

}  // namespace pmpc

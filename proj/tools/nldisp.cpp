// nldisp: scenario-driven front end for the nonlocal dispersal library.
//
//   nldisp <solve|sweep|scaling|mixing|eig> --config FILE [--out DIR] [--jobs N]
//
// Exit codes: 0 ok, 1 internal error, 2 config error, 3 no positive steady state,
// 4 resolution error, 5 iteration limit.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "nldisp/analytics.hpp"
#include "nldisp/io/config.hpp"
#include "nldisp/io/csv.hpp"
#include "nldisp/io/svg.hpp"
#include "nldisp/mixing.hpp"
#include "nldisp/spectral.hpp"
#include "nldisp/version.hpp"

namespace {

using namespace nldisp;
using io::ConfigError;
using io::CsvWriter;
using io::format_double;
using io::json;

enum Exit { ok = 0, internal = 1, config_error = 2, no_steady_state = 3, resolution = 4, iteration_limit = 5 };

/// Files produced by a command, written only once the command has finished.
struct Outcome {
    int code = Exit::ok;
    std::map<std::string, std::string> files;
    json results = json::object();
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Kernel make_kernel(const io::ScenarioConfig& c) {
    if (!c.kernel) throw ConfigError("config needs a 'kernel' block");
    return c.kernel->family == KernelFamily::gaussian ? Kernel::gaussian(c.kernel->param, c.domain.dim())
                                                      : Kernel::tophat(c.kernel->param, c.domain.dim());
}

GridPtr make_grid(const io::ScenarioConfig& c) {
    if (!c.grid) throw ConfigError("config needs a 'grid' block");
    return build_grid(c.domain, c.grid->counts, c.grid->grading);
}

NonlocalOperator make_operator(const io::ScenarioConfig& c) {
    auto grid = make_grid(c);
    const auto kernel = make_kernel(c);
    return assemble(std::move(grid), kernel, c.boundary, {c.grid->storage, c.grid->dense_cap});
}

const ResourceSpec& need_resource(const io::ScenarioConfig& c) {
    if (!c.resource) throw ConfigError("config needs a 'resource' block");
    return *c.resource;
}

// m_epsilon is defined through the Neumann removal rate, also for Dirichlet runs.
GridFunction resource_on(const NonlocalOperator& op, const io::ScenarioConfig& c) {
    const auto& spec = need_resource(c);
    if (std::holds_alternative<EpsilonResource>(spec) && op.boundary() == Boundary::dirichlet) {
        const auto neumann = assemble(op.grid_ptr(), op.kernel(), Boundary::neumann, {c.grid->storage, c.grid->dense_cap});
        return make_resource(spec, neumann);
    }
    return make_resource(spec, op);
}

std::vector<std::string> coordinate_header(int dim) {
    return dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

std::string node_table(const Grid& g, const std::vector<std::pair<std::string, const GridFunction*>>& columns) {
    CsvWriter csv;
    auto header = coordinate_header(g.dim());
    for (const auto& [name, _] : columns) header.push_back(name);
    csv.row(header);
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<std::string> row;
        for (int k = 0; k < g.dim(); ++k) row.push_back(format_double(g.node(i)[k]));
        for (const auto& [_, f] : columns) row.push_back(format_double((*f)[i]));
        csv.row(row);
    }
    return csv.str();
}

Outcome cmd_solve(const io::ScenarioConfig& c) {
    if (!c.d) throw ConfigError("solve needs 'd'");
    const auto op = make_operator(c);
    const auto m = resource_on(op, c);
    Outcome out;
    out.results["total_resource"] = integrate(m);
    try {
        const auto st = solve(op, *c.d, m, c.solver);
        const double T = integrate(st.theta);
        out.results["status"] = "ok";
        out.results["mu0"] = st.mu0;
        out.results["mu0_is_lower_bound"] = st.mu0_is_lower_bound;
        out.results["residual"] = st.residual;
        out.results["iterations"] = st.iterations;
        out.results["method"] = to_string(st.method);
        out.results["T"] = T;
        out.results["ratio"] = T / integrate(m);
        if (op.boundary() == Boundary::neumann) {
            const auto gap = population_identity_gap(op, *c.d, m, st.theta);
            out.results["identity_lhs"] = gap.lhs;
            out.results["identity_rhs"] = gap.rhs;
        }
        out.files["theta.csv"] = node_table(op.grid(), {{"m", &m}, {"theta", &st.theta}});
        spdlog::info("solve: d = {}, T = {}, ratio = {}", *c.d, T, T / integrate(m));
    } catch (const NoPositiveSteadyState& e) {
        out.code = Exit::no_steady_state;
        out.results["status"] = "no_positive_steady_state";
        out.results["mu0"] = e.mu0();
        out.results["message"] = e.what();
    }
    return out;
}

Outcome cmd_sweep(const io::ScenarioConfig& c, int jobs) {
    if (c.d_values.empty()) throw ConfigError("sweep needs a non-empty 'd_values'");
    const auto op = make_operator(c);
    const auto m = resource_on(op, c);
    const auto records = sweep_d(op, m, c.d_values, c.solver, jobs);
    Outcome out;
    CsvWriter csv;
    csv.row({"d", "T", "resource", "ratio", "mu0", "residual", "iterations"});
    json rows = json::array();
    std::vector<double> ds, ts;
    for (const auto& r : records) {
        const bool solved = r.status == RecordStatus::ok;
        csv.row({format_double(r.d), format_double(r.total_population), format_double(r.total_resource),
                 format_double(r.ratio), format_double(r.mu0), format_double(r.residual),
                 solved || r.status == RecordStatus::iteration_limit ? std::to_string(r.iterations) : ""});
        rows.push_back({{"d", r.d},
                        {"status", to_string(r.status)},
                        {"T", num(r.total_population)},
                        {"ratio", num(r.ratio)},
                        {"mu0", num(r.mu0)},
                        {"identity_lhs", num(r.identity_lhs)},
                        {"identity_rhs", num(r.identity_rhs)},
                        {"message", r.message}});
        ds.push_back(r.d);
        ts.push_back(r.total_population);
        spdlog::debug("sweep: d = {} status = {}", r.d, to_string(r.status));
    }
    out.results["records"] = rows;
    out.results["total_resource"] = integrate(m);
    out.files["sweep.csv"] = csv.str();
    out.files["sweep.svg"] = io::line_plot(ds, ts, true, {"total population", "d", "T(d)"});
    return out;
}

Outcome cmd_scaling(const io::ScenarioConfig& c, int jobs) {
    if (!c.scaling) throw ConfigError("scaling needs a 'scaling' block");
    const auto& s = *c.scaling;
    ScalingGridOptions grid_opts;
    grid_opts.base_counts = s.base_counts;
    grid_opts.ball_cells = s.ball_cells;
    if (c.grid) grid_opts.assembly = {c.grid->storage, c.grid->dense_cap};
    const auto res = scaling_experiment(c.domain, make_kernel(c), s.x0, s.alpha, s.d_values, c.solver, grid_opts, jobs);
    Outcome out;
    CsvWriter csv;
    csv.row({"d", "eps", "T", "resource", "ratio", "T_over_sqrt_d", "mu0_lower_bound", "iterations", "nodes"});
    for (std::size_t k = 0; k < res.d_values.size(); ++k) {
        const double d = res.d_values[k];
        csv.row({format_double(d), format_double(res.eps_values[k]), format_double(res.T_values[k]),
                 format_double(res.resource_values[k]), format_double(res.T_values[k] / res.resource_values[k]),
                 format_double(res.T_values[k] / std::sqrt(d)), format_double(res.mu0_lower_bounds[k]),
                 std::to_string(res.iterations[k]), std::to_string(res.node_counts[k])});
    }
    csv.row({"slope", format_double(res.slope)});
    csv.row({"slope_stderr", format_double(res.slope_stderr)});
    csv.row({"envelope", format_double(res.upper_envelope)});
    csv.row({"envelope_spread", format_double(res.envelope_spread)});
    out.files["scaling.csv"] = csv.str();
    out.files["scaling.svg"] = io::line_plot(res.d_values, res.T_values, true, {"concentrated resource", "d", "T(d)"});
    out.results = {{"alpha", res.alpha},
                   {"slope", res.slope},
                   {"slope_stderr", res.slope_stderr},
                   {"envelope", res.upper_envelope},
                   {"envelope_spread", res.envelope_spread}};
    spdlog::info("scaling: slope = {}, envelope = {}", res.slope, res.upper_envelope);
    return out;
}

Outcome cmd_mixing(const io::ScenarioConfig& c, int jobs) {
    const auto grid = make_grid(c);
    // The mixing model ignores the dispersal kernel; the resource is sampled on the grid.
    const auto probe = assemble(grid, c.kernel ? make_kernel(c) : Kernel::tophat(1.0, grid->dim()), Boundary::neumann,
                                {Storage::matrix_free, 0});
    const auto sc = make_mixing_scenario(make_resource(need_resource(c), probe));
    const io::MixingConfig mc = c.mixing.value_or(io::MixingConfig{});
    const auto d_grid = mc.d_grid.empty() ? default_d_grid(sc, mc.count) : mc.d_grid;
    const auto rep = certify_unimodal(sc, d_grid, mc.flat_tol, jobs);
    Outcome out;
    CsvWriter csv;
    csv.row({"d", "sbar", "sbar_prime"});
    for (std::size_t k = 0; k < d_grid.size(); ++k) {
        csv.row({format_double(d_grid[k]), format_double(rep.sbar[k]), format_double(rep.sbar_prime[k])});
    }
    csv.row({"unimodal", rep.unimodal ? "true" : "false"});
    csv.row({"argmax_d", format_double(rep.argmax_d)});
    csv.row({"L_bracket", format_double(rep.L_bracket.first), format_double(rep.L_bracket.second)});
    out.files["mixing.csv"] = csv.str();
    out.files["mixing.svg"] = io::line_plot(d_grid, rep.sbar, true, {"global mixing", "d", "mean theta"});
    out.results = {{"unimodal", rep.unimodal},
                   {"golden", sc.golden},
                   {"ratio", sc.ratio},
                   {"argmax_d", rep.argmax_d},
                   {"L_bracket", {rep.L_bracket.first, rep.L_bracket.second}},
                   {"has_transition", rep.has_transition},
                   {"bracket_inside", rep.bracket_inside},
                   {"outer_bounds_hold", rep.outer_bounds_hold},
                   {"transitions", rep.transitions}};
    spdlog::info("mixing: unimodal = {}, argmax d = {}", rep.unimodal, rep.argmax_d);
    return out;
}

Outcome cmd_eig(const io::ScenarioConfig& c) {
    if (!c.d) throw ConfigError("eig needs 'd'");
    const auto op = make_operator(c);
    const auto m = resource_on(op, c);
    const auto r = principal_eigenvalue(op, *c.d, m, c.solver.tol, c.solver.eig_max_iter);
    Outcome out;
    out.results = {{"mu0", r.mu0}, {"residual", r.residual}, {"iterations", r.iterations}};
    out.files["eigenvector.csv"] = node_table(op.grid(), {{"psi", &r.eigenvector}});
    spdlog::info("eig: mu0 = {}, residual = {}", r.mu0, r.residual);
    return out;
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("nldisp");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("NLDISP_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else if (level == "info") {
        spdlog::set_level(spdlog::level::info);
    } else {
        spdlog::set_level(spdlog::level::err);
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Nonlocal dispersal logistic steady states and experiments"};
    std::string command, config_path, out_dir = ".";
    int jobs = 1;
    app.add_option("command", command, "solve | sweep | scaling | mixing | eig")
        ->required()
        ->check(CLI::IsMember({"solve", "sweep", "scaling", "mixing", "eig"}));
    app.add_option("--config", config_path, "scenario JSON file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for per-d solves")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    const auto started = std::chrono::steady_clock::now();
    io::ScenarioConfig cfg;
    Outcome outcome;
    try {
        cfg = io::load_config(config_path);
        if (command == "solve") {
            outcome = cmd_solve(cfg);
        } else if (command == "sweep") {
            outcome = cmd_sweep(cfg, jobs);
        } else if (command == "scaling") {
            outcome = cmd_scaling(cfg, jobs);
        } else if (command == "mixing") {
            outcome = cmd_mixing(cfg, jobs);
        } else {
            outcome = cmd_eig(cfg);
        }
    } catch (const ConfigError& e) {
        spdlog::error("config error: {}", e.what());
        return Exit::config_error;
    } catch (const DomainError& e) {
        spdlog::error("invalid scenario: {}", e.what());
        return Exit::config_error;
    } catch (const ResolutionError& e) {
        outcome = {};
        outcome.code = Exit::resolution;
        outcome.results = {{"status", "resolution_error"}, {"message", e.what()}, {"required_counts", e.required_counts()}};
        spdlog::error("resolution error: {}", e.what());
    } catch (const NoPositiveSteadyState& e) {
        outcome = {};
        outcome.code = Exit::no_steady_state;
        outcome.results = {{"status", "no_positive_steady_state"}, {"mu0", e.mu0()}, {"message", e.what()}};
        spdlog::error("{}", e.what());
    } catch (const IterationLimitError& e) {
        outcome = {};
        outcome.code = Exit::iteration_limit;
        outcome.results = {{"status", "iteration_limit"}, {"iterations", e.iterations()}, {"message", e.what()}};
        spdlog::error("iteration limit: {}", e.what());
    } catch (const Error& e) {
        spdlog::error("internal error: {}", e.what());
        return Exit::internal;
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json report{{"command", command},
                {"version", nldisp::version},
                {"seed", 0},
                {"wall_time_seconds", wall},
                {"exit_code", outcome.code},
                {"config", io::to_json(cfg)},
                {"results", outcome.results}};
    try {
        std::filesystem::create_directories(out_dir);
        for (const auto& [name, content] : outcome.files) {
            io::write_file((std::filesystem::path(out_dir) / name).string(), content);
        }
        io::write_file((std::filesystem::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return Exit::internal;
    }
    return outcome.code;
}

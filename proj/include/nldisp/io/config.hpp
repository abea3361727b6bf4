#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "nldisp/analytics.hpp"
#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/kernel.hpp"
#include "nldisp/operator.hpp"
#include "nldisp/resource.hpp"
#include "nldisp/steady.hpp"

namespace nldisp::io {

using json = nlohmann::json;

/// Malformed or out-of-range scenario file.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct KernelConfig {
    KernelFamily family = KernelFamily::gaussian;
    double param = 0.1;
    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

struct GridConfig {
    std::vector<int> counts;
    std::optional<Grading> grading;
    Storage storage = Storage::automatic;
    std::size_t dense_cap = 4096;
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct ScalingConfig {
    double alpha = 0.5;
    Point x0{0.5, 0.5};
    std::vector<double> d_values;
    int base_counts = 1000;
    int ball_cells = 16;
    friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

struct MixingConfig {
    std::vector<double> d_grid;  ///< empty: default grid
    int count = 400;
    double flat_tol = -1.0;
    friend bool operator==(const MixingConfig&, const MixingConfig&) = default;
};

struct ScenarioConfig {
    Domain domain = Domain::unit_interval();
    std::optional<GridConfig> grid;
    std::optional<KernelConfig> kernel;
    Boundary boundary = Boundary::neumann;
    std::optional<ResourceSpec> resource;
    SolverOptions solver{};
    std::optional<double> d;
    std::vector<double> d_values;
    std::optional<ScalingConfig> scaling;
    std::optional<MixingConfig> mixing;
};

inline bool operator==(const SolverOptions& a, const SolverOptions& b) {
    return a.tol == b.tol && a.max_iter == b.max_iter && a.dt_safety == b.dt_safety && a.method == b.method &&
           a.gate == b.gate && a.gate_tol == b.gate_tol && a.eig_max_iter == b.eig_max_iter && a.initial == b.initial;
}

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.domain == b.domain && a.grid == b.grid && a.kernel == b.kernel && a.boundary == b.boundary &&
           a.resource == b.resource && a.solver == b.solver && a.d == b.d && a.d_values == b.d_values &&
           a.scaling == b.scaling && a.mixing == b.mixing;
}

namespace detail {

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

inline const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + " must be finite");
    return v;
}

inline double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) throw ConfigError(where + " must be > 0");
    return v;
}

inline int integer(const json& j, const std::string& where, int lo) {
    if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > std::numeric_limits<int>::max()) throw ConfigError(where + " out of range");
    return static_cast<int>(v);
}

inline std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + " must be a string");
    return j.get<std::string>();
}

inline Interval interval(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + " must be [lo, hi]");
    return {number(j[0], where), number(j[1], where)};
}

inline std::vector<Interval> boxes(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a list of [lo, hi]");
    std::vector<Interval> out;
    for (const auto& b : j) out.push_back(interval(b, where));
    return out;
}

inline std::vector<double> positive_list(const json& j, const std::string& where) {
    if (j.is_object()) {
        only_keys(j, where, {"from", "to", "count"});
        return log_space(positive(need(j, "from", where), where + ".from"), positive(need(j, "to", where), where + ".to"),
                         integer(need(j, "count", where), where + ".count", 1));
    }
    if (!j.is_array()) throw ConfigError(where + " must be a list or {from, to, count}");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(positive(v, where));
    return out;
}

inline Point point(const json& j, int dim, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        throw ConfigError(where + " must have one coordinate per axis");
    }
    Point p{0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = number(j[k], where);
    return p;
}

template <class E>
E choose(const std::string& value, const std::string& where, std::initializer_list<std::pair<const char*, E>> names) {
    for (const auto& [n, e] : names) {
        if (value == n) return e;
    }
    throw ConfigError(where + ": unknown value '" + value + "'");
}

inline ResourceSpec resource(const json& j, int dim) {
    const std::string where = "resource";
    const auto preset = text(need(j, "preset", where), "resource.preset");
    if (preset == "constant") {
        only_keys(j, where, {"preset", "value"});
        ConstantResource r;
        if (j.contains("value")) r.value = number(j["value"], "resource.value");
        if (r.value < 0.0) throw ConfigError("resource.value must be >= 0");
        return r;
    }
    if (preset == "sine") {
        only_keys(j, where, {"preset", "base", "amplitude", "frequency"});
        SineResource r;
        if (j.contains("base")) r.base = number(j["base"], "resource.base");
        if (j.contains("amplitude")) r.amplitude = number(j["amplitude"], "resource.amplitude");
        if (j.contains("frequency")) r.frequency = number(j["frequency"], "resource.frequency");
        if (r.base < std::abs(r.amplitude)) throw ConfigError("sine resource must be nonnegative: base >= |amplitude|");
        return r;
    }
    if (preset == "two_patch") {
        only_keys(j, where, {"preset", "low", "high", "split"});
        TwoPatchResource r;
        if (j.contains("low")) r.low = number(j["low"], "resource.low");
        if (j.contains("high")) r.high = number(j["high"], "resource.high");
        if (j.contains("split")) r.split = number(j["split"], "resource.split");
        if (r.low < 0.0 || r.high < 0.0) throw ConfigError("two_patch levels must be >= 0");
        if (!(r.split > 0.0 && r.split < 1.0)) throw ConfigError("resource.split must lie in (0, 1)");
        return r;
    }
    if (preset == "m_epsilon") {
        only_keys(j, where, {"preset", "x0", "eps"});
        EpsilonResource r;
        r.x0 = point(need(j, "x0", where), dim, "resource.x0");
        r.eps = positive(need(j, "eps", where), "resource.eps");
        return r;
    }
    throw ConfigError("resource.preset: unknown preset '" + preset + "'");
}

inline SolverOptions solver(const json& j) {
    only_keys(j, "solver", {"tol", "max_iter", "method", "dt_safety", "gate", "gate_tol", "eig_max_iter"});
    SolverOptions o;
    if (j.contains("tol")) o.tol = positive(j["tol"], "solver.tol");
    if (j.contains("max_iter")) o.max_iter = integer(j["max_iter"], "solver.max_iter", 0);
    if (j.contains("method")) {
        o.method = choose<Method>(text(j["method"], "solver.method"), "solver.method",
                                  {{"algebraic_fp", Method::algebraic_fp}, {"monotone_time", Method::monotone_time}});
    }
    if (j.contains("dt_safety")) {
        o.dt_safety = number(j["dt_safety"], "solver.dt_safety");
        if (!(o.dt_safety > 0.0 && o.dt_safety < 1.0)) throw ConfigError("solver.dt_safety must lie in (0, 1)");
    }
    if (j.contains("gate")) {
        o.gate = choose<Gate>(text(j["gate"], "solver.gate"), "solver.gate",
                              {{"eigen", Gate::eigen}, {"certify", Gate::certify}});
    }
    if (j.contains("gate_tol")) o.gate_tol = number(j["gate_tol"], "solver.gate_tol");
    if (j.contains("eig_max_iter")) o.eig_max_iter = integer(j["eig_max_iter"], "solver.eig_max_iter", 1);
    return o;
}

}  // namespace detail

/// Parses a scenario from JSON. Every block except "domain" is optional here;
/// the commands check for the blocks they need.
inline ScenarioConfig parse_config(const json& j) {
    using namespace detail;
    only_keys(j, "config", {"domain", "grid", "kernel", "boundary", "resource", "solver", "d", "d_values",
                            "scaling", "mixing"});
    ScenarioConfig c;
    {
        const auto& dj = need(j, "domain", "config");
        only_keys(dj, "domain", {"dim", "bounds"});
        auto bounds = boxes(need(dj, "bounds", "domain"), "domain.bounds");
        if (dj.contains("dim") && integer(dj["dim"], "domain.dim", 1) != static_cast<int>(bounds.size())) {
            throw ConfigError("domain.dim does not match the number of bounds");
        }
        try {
            c.domain = Domain(std::move(bounds));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("domain: ") + e.what());
        }
    }
    const int dim = c.domain.dim();
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        only_keys(g, "grid", {"counts", "grading", "storage", "dense_cap"});
        GridConfig gc;
        const auto& counts = need(g, "counts", "grid");
        if (!counts.is_array() || static_cast<int>(counts.size()) != dim) {
            throw ConfigError("grid.counts needs one entry per axis");
        }
        for (const auto& n : counts) gc.counts.push_back(integer(n, "grid.counts", 2));
        if (g.contains("grading")) {
            only_keys(g["grading"], "grid.grading", {"region", "factor"});
            Grading gr;
            gr.region = boxes(need(g["grading"], "region", "grid.grading"), "grid.grading.region");
            gr.factor = number(need(g["grading"], "factor", "grid.grading"), "grid.grading.factor");
            if (static_cast<int>(gr.region.size()) != dim) throw ConfigError("grid.grading.region needs one interval per axis");
            if (!(gr.factor >= 1.0)) throw ConfigError("grid.grading.factor must be >= 1");
            for (int k = 0; k < dim; ++k) {
                if (!(gr.region[k].length() > 0.0) || !c.domain.bound(k).contains(gr.region[k])) {
                    throw ConfigError("grid.grading.region must be a non-empty box inside the domain");
                }
            }
            gc.grading = gr;
        }
        if (g.contains("storage")) {
            gc.storage = choose<Storage>(text(g["storage"], "grid.storage"), "grid.storage",
                                         {{"automatic", Storage::automatic},
                                          {"dense", Storage::dense},
                                          {"matrix_free", Storage::matrix_free}});
        }
        if (g.contains("dense_cap")) gc.dense_cap = static_cast<std::size_t>(integer(g["dense_cap"], "grid.dense_cap", 1));
        c.grid = gc;
    }
    if (j.contains("kernel")) {
        only_keys(j["kernel"], "kernel", {"family", "param"});
        KernelConfig k;
        k.family = choose<KernelFamily>(text(need(j["kernel"], "family", "kernel"), "kernel.family"), "kernel.family",
                                        {{"gaussian", KernelFamily::gaussian}, {"tophat", KernelFamily::tophat}});
        k.param = positive(need(j["kernel"], "param", "kernel"), "kernel.param");
        c.kernel = k;
    }
    if (j.contains("boundary")) {
        c.boundary = choose<Boundary>(text(j["boundary"], "boundary"), "boundary",
                                      {{"neumann", Boundary::neumann}, {"dirichlet", Boundary::dirichlet}});
    }
    if (j.contains("resource")) c.resource = resource(j["resource"], dim);
    if (j.contains("solver")) c.solver = solver(j["solver"]);
    if (j.contains("d")) c.d = positive(j["d"], "d");
    if (j.contains("d_values")) c.d_values = positive_list(j["d_values"], "d_values");
    if (j.contains("scaling")) {
        const auto& s = j["scaling"];
        only_keys(s, "scaling", {"alpha", "x0", "d_values", "base_counts", "ball_cells"});
        ScalingConfig sc;
        if (s.contains("alpha")) sc.alpha = number(s["alpha"], "scaling.alpha");
        if (!(sc.alpha >= 0.0 && sc.alpha < 1.0)) throw ConfigError("scaling.alpha must lie in [0, 1)");
        sc.x0 = point(need(s, "x0", "scaling"), dim, "scaling.x0");
        sc.d_values = positive_list(need(s, "d_values", "scaling"), "scaling.d_values");
        if (s.contains("base_counts")) sc.base_counts = integer(s["base_counts"], "scaling.base_counts", 2);
        if (s.contains("ball_cells")) sc.ball_cells = integer(s["ball_cells"], "scaling.ball_cells", 1);
        c.scaling = sc;
    }
    if (j.contains("mixing")) {
        const auto& mj = j["mixing"];
        only_keys(mj, "mixing", {"d_grid", "count", "flat_tol"});
        MixingConfig mc;
        if (mj.contains("d_grid")) mc.d_grid = positive_list(mj["d_grid"], "mixing.d_grid");
        if (mj.contains("count")) mc.count = integer(mj["count"], "mixing.count", 2);
        if (mj.contains("flat_tol")) mc.flat_tol = number(mj["flat_tol"], "mixing.flat_tol");
        c.mixing = mc;
    }
    return c;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace detail {

inline json box_json(const std::vector<Interval>& b) {
    json out = json::array();
    for (const auto& i : b) out.push_back({i.lo, i.hi});
    return out;
}

inline json point_json(const Point& p, int dim) {
    json out = json::array();
    for (int k = 0; k < dim; ++k) out.push_back(p[k]);
    return out;
}

inline std::string storage_name(Storage s) {
    return s == Storage::dense ? "dense" : s == Storage::matrix_free ? "matrix_free" : "automatic";
}

}  // namespace detail

/// Fully explicit echo of a config: parse_config(to_json(c)) == c.
inline json to_json(const ScenarioConfig& c) {
    using namespace detail;
    json j;
    j["domain"] = {{"dim", c.domain.dim()}, {"bounds", box_json(c.domain.bounds())}};
    if (c.grid) {
        json g{{"counts", c.grid->counts}, {"storage", storage_name(c.grid->storage)}, {"dense_cap", c.grid->dense_cap}};
        if (c.grid->grading) g["grading"] = {{"region", box_json(c.grid->grading->region)}, {"factor", c.grid->grading->factor}};
        j["grid"] = g;
    }
    if (c.kernel) j["kernel"] = {{"family", to_string(c.kernel->family)}, {"param", c.kernel->param}};
    j["boundary"] = to_string(c.boundary);
    if (c.resource) {
        j["resource"] = std::visit(
            [&](const auto& r) -> json {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantResource>) {
                    return {{"preset", "constant"}, {"value", r.value}};
                } else if constexpr (std::is_same_v<T, SineResource>) {
                    return {{"preset", "sine"}, {"base", r.base}, {"amplitude", r.amplitude}, {"frequency", r.frequency}};
                } else if constexpr (std::is_same_v<T, TwoPatchResource>) {
                    return {{"preset", "two_patch"}, {"low", r.low}, {"high", r.high}, {"split", r.split}};
                } else {
                    return {{"preset", "m_epsilon"}, {"x0", point_json(r.x0, c.domain.dim())}, {"eps", r.eps}};
                }
            },
            *c.resource);
    }
    j["solver"] = {{"tol", c.solver.tol},
                   {"max_iter", c.solver.max_iter},
                   {"method", to_string(c.solver.method)},
                   {"dt_safety", c.solver.dt_safety},
                   {"gate", c.solver.gate == Gate::eigen ? "eigen" : "certify"},
                   {"gate_tol", c.solver.gate_tol},
                   {"eig_max_iter", c.solver.eig_max_iter}};
    if (c.d) j["d"] = *c.d;
    if (!c.d_values.empty()) j["d_values"] = c.d_values;
    if (c.scaling) {
        j["scaling"] = {{"alpha", c.scaling->alpha},
                        {"x0", point_json(c.scaling->x0, c.domain.dim())},
                        {"d_values", c.scaling->d_values},
                        {"base_counts", c.scaling->base_counts},
                        {"ball_cells", c.scaling->ball_cells}};
    }
    if (c.mixing) {
        json m{{"count", c.mixing->count}, {"flat_tol", c.mixing->flat_tol}};
        if (!c.mixing->d_grid.empty()) m["d_grid"] = c.mixing->d_grid;
        j["mixing"] = m;
    }
    return j;
}

}  // namespace nldisp::io

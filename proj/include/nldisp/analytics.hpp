#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/operator.hpp"
#include "nldisp/parallel.hpp"
#include "nldisp/regression.hpp"
#include "nldisp/resource.hpp"
#include "nldisp/steady.hpp"

namespace nldisp {

/// Both sides of  int theta - int m = d/2 iint k (theta(x) - theta(y))^2 / (theta(x) theta(y)).
struct IdentityGap {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline IdentityGap population_identity_gap(const NonlocalOperator& op, double d, const GridFunction& m,
                                           const GridFunction& theta) {
    if (op.boundary() != Boundary::neumann) throw DomainError("population identity needs the Neumann operator");
    if (m.grid_ptr() != op.grid_ptr() || theta.grid_ptr() != op.grid_ptr()) {
        throw DomainError("population identity: grid mismatch");
    }
    if (!(theta.min() > 0.0)) throw DomainError("population identity needs theta > 0 everywhere");
    const auto w = op.grid().weights();
    double pair_sum = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        double row = 0.0;
        op.for_each_in_row(i, [&](std::size_t j, double k) {
            const double diff = theta[i] - theta[j];
            row += k * w[j] * diff * diff / (theta[i] * theta[j]);
        });
        pair_sum += w[i] * row;
    }
    return {integrate(theta) - integrate(m), 0.5 * d * pair_sum};
}

/// T'(0) = 1/2 iint k (m(x) - m(y))^2 / (m(x) m(y)): slope of the total population at d = 0+.
inline double tprime_at_zero(const NonlocalOperator& op, const GridFunction& m) {
    if (m.grid_ptr() != op.grid_ptr()) throw DomainError("tprime_at_zero: grid mismatch");
    if (!(m.min() > 0.0)) throw DomainError("tprime_at_zero needs min m > 0");
    const auto w = op.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        double row = 0.0;
        op.for_each_in_row(i, [&](std::size_t j, double k) {
            const double diff = m[i] - m[j];
            row += k * w[j] * diff * diff / (m[i] * m[j]);
        });
        s += w[i] * row;
    }
    return 0.5 * s;
}

enum class RecordStatus { ok, no_positive_steady_state, iteration_limit, failed };

inline std::string to_string(RecordStatus s) {
    switch (s) {
        case RecordStatus::ok: return "ok";
        case RecordStatus::no_positive_steady_state: return "no_positive_steady_state";
        case RecordStatus::iteration_limit: return "iteration_limit";
        case RecordStatus::failed: return "failed";
    }
    return "?";
}

/// One row of a dispersal-rate sweep. Failed solves keep their row with status != ok.
struct SweepRecord {
    double d = 0.0;
    double total_population = std::numeric_limits<double>::quiet_NaN();
    double total_resource = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double mu0 = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    /// Sides of the population identity (Neumann only, NaN otherwise).
    double identity_lhs = std::numeric_limits<double>::quiet_NaN();
    double identity_rhs = std::numeric_limits<double>::quiet_NaN();
    double theta_sup = std::numeric_limits<double>::quiet_NaN();
    RecordStatus status = RecordStatus::ok;
    std::string message;
};

inline SweepRecord solve_record(const NonlocalOperator& op, const GridFunction& m, double d,
                                const SolverOptions& opts) {
    SweepRecord rec;
    rec.d = d;
    rec.total_resource = integrate(m);
    try {
        const auto st = solve(op, d, m, opts);
        rec.total_population = integrate(st.theta);
        rec.ratio = rec.total_population / rec.total_resource;
        rec.mu0 = st.mu0;
        rec.residual = st.residual;
        rec.iterations = st.iterations;
        rec.theta_sup = supnorm(st.theta);
        if (op.boundary() == Boundary::neumann) {
            const auto gap = population_identity_gap(op, d, m, st.theta);
            rec.identity_lhs = gap.lhs;
            rec.identity_rhs = gap.rhs;
        }
    } catch (const NoPositiveSteadyState& e) {
        rec.status = RecordStatus::no_positive_steady_state;
        rec.mu0 = e.mu0();
        rec.message = e.what();
    } catch (const IterationLimitError& e) {
        rec.status = RecordStatus::iteration_limit;
        rec.iterations = e.iterations();
        rec.message = e.what();
    } catch (const Error& e) {
        rec.status = RecordStatus::failed;
        rec.message = e.what();
    }
    return rec;
}

/// Solves the steady state for every d (gated by mu0) and reports T(d) = int theta.
/// Records come back in input order; `jobs` > 1 solves concurrently.
inline std::vector<SweepRecord> sweep_d(const NonlocalOperator& op, const GridFunction& m,
                                        const std::vector<double>& d_values, const SolverOptions& opts = {},
                                        int jobs = 1) {
    for (double d : d_values) {
        if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("sweep_d: every d must be > 0");
    }
    return parallel_map(d_values.size(), jobs,
                        [&](std::size_t k) { return solve_record(op, m, d_values[k], opts); });
}

/// `count` log-spaced values from `from` to `to` inclusive.
inline std::vector<double> log_space(double from, double to, int count) {
    if (!(from > 0.0 && to > 0.0) || count < 1) throw DomainError("log_space needs positive bounds, count >= 1");
    std::vector<double> out;
    if (count == 1) return {from};
    const double lf = std::log(from), lt = std::log(to);
    for (int k = 0; k < count; ++k) {
        out.push_back(k == 0 ? from : k == count - 1 ? to : std::exp(lf + (lt - lf) * k / (count - 1)));
    }
    return out;
}

struct ScalingGridOptions {
    int base_counts = 1000;  ///< cells per axis outside the ball
    int ball_cells = 16;     ///< minimum cells across the ball per axis
    AssemblyOptions assembly{};
};

struct ScalingResult {
    double alpha = 0.0;
    std::vector<double> d_values;
    std::vector<double> eps_values;
    std::vector<double> T_values;
    std::vector<double> resource_values;
    std::vector<double> mu0_lower_bounds;
    std::vector<int> iterations;
    std::vector<std::size_t> node_counts;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double upper_envelope = 0.0;   ///< max T / sqrt(d)
    double envelope_spread = 0.0;  ///< max/min of T / sqrt(d) over the upper half of the sweep
};

/// eps coupled to d: alpha / d, or d^-2 as the alpha = 0 surrogate.
inline double scaling_eps(double alpha, double d) { return alpha > 0.0 ? alpha / d : 1.0 / (d * d); }

/// Total population of the concentrated-resource steady state along d with eps = eps(alpha, d),
/// and the log-log slope of T(d).
inline ScalingResult scaling_experiment(const Domain& domain, const Kernel& kernel, const Point& x0, double alpha,
                                        const std::vector<double>& d_values, const SolverOptions& opts = {},
                                        const ScalingGridOptions& grid_opts = {}, int jobs = 1) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("scaling_experiment: alpha must lie in [0, 1)");
    if (d_values.size() < 2) throw DomainError("scaling_experiment: slope needs at least two d values");
    for (std::size_t k = 0; k < d_values.size(); ++k) {
        if (!(d_values[k] > 0.0)) throw DomainError("scaling_experiment: d must be > 0");
        if (k > 0 && !(d_values[k] > d_values[k - 1])) {
            throw DomainError("scaling_experiment: d values must be strictly increasing");
        }
    }
    const int n = domain.dim();
    struct Row {
        double eps, T, resource, mu0;
        int iterations;
        std::size_t nodes;
    };
    auto run = [&](std::size_t k) -> Row {
        const double d = d_values[k];
        const double eps = scaling_eps(alpha, d);
        const double r = std::pow(eps, 1.0 / n);
        Grading grading;
        std::vector<int> counts;
        double factor = 1.0;
        for (int ax = 0; ax < n; ++ax) {
            const auto& b = domain.bound(ax);
            if (!(x0[ax] - r > b.lo && x0[ax] + r < b.hi)) {
                throw DomainError("scaling_experiment: ball leaves the domain at d = " + std::to_string(d));
            }
            grading.region.push_back({x0[ax] - r, x0[ax] + r});
            const double h = b.length() / grid_opts.base_counts;
            factor = std::max(factor, std::ceil(grid_opts.ball_cells * h / (2.0 * r)));
            counts.push_back(grid_opts.base_counts);
        }
        grading.factor = factor;
        auto grid = build_grid(domain, counts, grading);
        const auto op = assemble(grid, kernel, Boundary::neumann, grid_opts.assembly);
        try {
            const auto res = build_m_epsilon(op, x0, eps);
            SolverOptions local = opts;
            local.gate = Gate::certify;
            const auto st = solve(op, d, res.m, local);
            return {eps, integrate(st.theta), res.discrete_total, st.mu0, st.iterations, grid->size()};
        } catch (const ResolutionError& e) {
            throw ResolutionError(std::string(e.what()) + " (d = " + std::to_string(d) + ")", e.required_counts());
        }
    };
    const auto rows = parallel_map(d_values.size(), jobs, run);

    ScalingResult out;
    out.alpha = alpha;
    out.d_values = d_values;
    std::vector<double> log_d, log_t;
    for (const auto& r : rows) {
        out.eps_values.push_back(r.eps);
        out.T_values.push_back(r.T);
        out.resource_values.push_back(r.resource);
        out.mu0_lower_bounds.push_back(r.mu0);
        out.iterations.push_back(r.iterations);
        out.node_counts.push_back(r.nodes);
    }
    for (std::size_t k = 0; k < d_values.size(); ++k) {
        log_d.push_back(std::log(d_values[k]));
        log_t.push_back(std::log(out.T_values[k]));
        out.upper_envelope = std::max(out.upper_envelope, out.T_values[k] / std::sqrt(d_values[k]));
    }
    const auto fit = fit_line(log_d, log_t);
    out.slope = fit.slope;
    out.slope_stderr = fit.slope_stderr;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = d_values.size() / 2; k < d_values.size(); ++k) {
        const double q = out.T_values[k] / std::sqrt(d_values[k]);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    out.envelope_spread = hi / lo;
    return out;
}

}  // namespace nldisp

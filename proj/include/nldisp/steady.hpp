#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/operator.hpp"
#include "nldisp/spectral.hpp"

namespace nldisp {

enum class Method { monotone_time, algebraic_fp };

inline std::string to_string(Method m) {
    return m == Method::monotone_time ? "monotone_time" : "algebraic_fp";
}

/// How the existence gate mu0 > gate_tol is decided.
enum class Gate {
    eigen,    ///< converge the principal eigenvalue
    certify   ///< stop at the first Rayleigh quotient above gate_tol (reports a lower bound)
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 0;  ///< 0 selects the method default: 10^6 time steps, 10^5 fixed-point steps
    double dt_safety = 0.9;
    Method method = Method::algebraic_fp;
    Gate gate = Gate::eigen;
    double gate_tol = 1e-10;
    /// Power-iteration budget of the existence gate. When it runs out with a positive
    /// Rayleigh quotient, that quotient is reported as a lower bound on mu0.
    int eig_max_iter = 100'000;
    /// Start from these values instead of the constant sup m. Monotonicity is only
    /// enforced when the start is a constant >= sup m.
    std::optional<std::vector<double>> initial;
};

struct SteadyState {
    GridFunction theta;
    double d = 0.0;
    double residual = 0.0;
    int iterations = 0;
    Method method = Method::algebraic_fp;
    double mu0 = 0.0;
    bool mu0_is_lower_bound = false;
};

/// Observer of solver iterates: (iteration, values). Iteration 0 is the initial state.
using IterateObserver = std::function<void(int, std::span<const double>)>;

/// sup-norm of dL theta + theta (m - theta).
inline double residual(const NonlocalOperator& op, double d, const GridFunction& m, std::span<const double> theta) {
    std::vector<double> lt(op.size());
    op.apply(theta, lt);
    double r = 0.0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        r = std::max(r, std::abs(d * lt[i] + theta[i] * (m[i] - theta[i])));
    }
    return r;
}

inline double residual(const NonlocalOperator& op, double d, const GridFunction& m, const GridFunction& theta) {
    if (m.grid_ptr() != op.grid_ptr() || theta.grid_ptr() != op.grid_ptr()) {
        throw DomainError("residual: grid mismatch");
    }
    return residual(op, d, m, theta.values());
}

/// E[v] = 1/2 int (d L[v] v + m v^2) - 1/3 int v^3; nondecreasing along the flow.
inline double energy(const NonlocalOperator& op, double d, const GridFunction& m, std::span<const double> v) {
    std::vector<double> lv(op.size());
    op.apply(v, lv);
    const auto w = op.grid().weights();
    double e = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        e += w[i] * (0.5 * (d * lv[i] * v[i] + m[i] * v[i] * v[i]) - v[i] * v[i] * v[i] / 3.0);
    }
    return e;
}

inline double energy(const NonlocalOperator& op, double d, const GridFunction& m, const GridFunction& v) {
    return energy(op, d, m, v.values());
}

namespace detail {

struct GateOutcome {
    double mu0;
    bool lower_bound;
};

inline GateOutcome existence_gate(const NonlocalOperator& op, double d, const GridFunction& m,
                                  const SolverOptions& opts) {
    if (opts.gate == Gate::certify) {
        const auto c = certify_positive(op, d, m, opts.gate_tol, 1e-10, opts.eig_max_iter);
        if (!c.positive) {
            throw NoPositiveSteadyState("mu0 <= gate tolerance: no positive steady state", c.bound);
        }
        return {c.bound, true};
    }
    try {
        const auto eig = principal_eigenvalue(op, d, m, 1e-10, opts.eig_max_iter);
        if (eig.mu0 <= opts.gate_tol) {
            throw NoPositiveSteadyState("mu0 <= gate tolerance: no positive steady state", eig.mu0);
        }
        return {eig.mu0, false};
    } catch (const IterationLimitError& e) {
        // Nearly degenerate top eigenvalues (tiny d) stall the power iteration. Its last
        // Rayleigh quotient still bounds mu0 from below, which settles the gate when positive.
        if (!(e.best_value() > opts.gate_tol)) throw;
        return {e.best_value(), true};
    }
}

inline void check_solver_inputs(const NonlocalOperator& op, double d, const GridFunction& m,
                                const SolverOptions& opts) {
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("dispersal rate d must be > 0");
    if (m.grid_ptr() != op.grid_ptr()) throw DomainError("resource lives on a different grid");
    if (!(opts.tol > 0.0)) throw DomainError("solver tol must be > 0");
    if (opts.max_iter < 0) throw DomainError("solver max_iter must be >= 1");
    if (!(opts.dt_safety > 0.0 && opts.dt_safety < 1.0)) throw DomainError("dt_safety must lie in (0, 1)");
    if (opts.initial) {
        if (opts.initial->size() != op.size()) throw DomainError("initial data has the wrong length");
        for (double v : *opts.initial) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("initial data must be positive");
        }
    }
}

struct Start {
    std::vector<double> values;
    bool monotone;  // a constant supersolution: iterates must decrease
};

inline Start initial_state(const GridFunction& m, const SolverOptions& opts) {
    const double big_m = supnorm(m);
    if (!opts.initial) return {std::vector<double>(m.size(), big_m), true};
    const auto& u = *opts.initial;
    const bool constant = std::all_of(u.begin(), u.end(), [&](double v) { return v == u.front(); });
    return {u, constant && u.front() >= big_m};
}

inline SteadyState finish(const NonlocalOperator& op, double d, const GridFunction& m,
                          std::vector<double> theta, int iterations, Method method, GateOutcome gate) {
    for (double v : theta) {
        if (!(v > 0.0)) throw ConsistencyError("converged steady state is not strictly positive");
    }
    const double res = residual(op, d, m, theta);
    return {GridFunction(op.grid_ptr(), std::move(theta)), d, res, iterations, method, gate.mu0, gate.lower_bound};
}

inline double residual_bound(double big_m) { return 1e-9 * std::max(1.0, big_m * big_m); }

// Converged once the step is below `stop` and so is the remaining distance to the limit,
// estimated from the observed contraction rho = step / previous_step as step rho / (1 - rho).
// Steps at roundoff level count as converged whatever rho is.
inline bool settled(double step, double previous_step, double stop, double floor) {
    if (!(step <= stop)) return false;
    if (step <= floor) return true;
    if (!(previous_step > 0.0) || !std::isfinite(previous_step)) return false;
    const double rho = step / previous_step;
    return rho < 1.0 && step * rho / (1.0 - rho) <= stop;
}

}  // namespace detail

/// Explicit Euler for u_t = dL u + u (m - u) from the supersolution u = sup m.
///
/// dt = dt_safety / (d max(a) + sup m + 2 U) with U the largest initial value, which keeps
/// the update map order preserving, so iterates decrease monotonically to theta.
/// Stops when ||u^{k+1} - u^k|| / dt <= tol * max(1, sup m) and the geometric estimate of
/// the remaining distance to theta is below the same bound.
inline SteadyState solve_monotone(const NonlocalOperator& op, double d, const GridFunction& m,
                                  const SolverOptions& opts = {}, const IterateObserver& observer = {}) {
    detail::check_solver_inputs(op, d, m, opts);
    const auto gate = detail::existence_gate(op, d, m, opts);
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 1'000'000;
    const double big_m = supnorm(m);
    auto [u, monotone] = detail::initial_state(m, opts);
    const double top = std::max(big_m, *std::max_element(u.begin(), u.end()));
    const double dt = opts.dt_safety / (d * op.max_removal() + big_m + 2.0 * top);
    const double stop = opts.tol * std::max(1.0, big_m);
    const double slack = 1e-13 * std::max(1.0, top);

    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, top);
    double previous_rate = std::numeric_limits<double>::infinity();
    std::vector<double> lu(u.size());
    if (observer) observer(0, u);
    for (int k = 1; k <= max_iter; ++k) {
        op.apply(u, lu);
        double rate = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            lu[i] = d * lu[i] + u[i] * (m[i] - u[i]);
            rate = std::max(rate, std::abs(lu[i]));
        }
        if (detail::settled(rate, previous_rate, stop, floor / dt)) {
            return detail::finish(op, d, m, std::move(u), k - 1, Method::monotone_time, gate);
        }
        previous_rate = rate;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double next = u[i] + dt * lu[i];
            if (monotone && next > u[i] + slack) {
                throw StepSizeError("time stepping lost monotonicity at node " + std::to_string(i));
            }
            u[i] = next;
        }
        if (observer) observer(k, u);
    }
    throw IterationLimitError("monotone time stepping hit the iteration limit", u, 0.0, max_iter);
}

/// Fixed-point iteration on the pointwise root of the steady equation,
///   theta = (m - d a + sqrt((m - d a)^2 + 4 d K theta)) / 2,
/// from theta = sup m. The map is order preserving and maps [0, sup m] into itself,
/// so the iterates decrease to the maximal (positive) fixed point. The mean mode contracts
/// only like 1 - theta/(d a), so large d needs O(d) iterations.
inline SteadyState solve_fixed_point(const NonlocalOperator& op, double d, const GridFunction& m,
                                     const SolverOptions& opts = {}, const IterateObserver& observer = {}) {
    detail::check_solver_inputs(op, d, m, opts);
    const auto gate = detail::existence_gate(op, d, m, opts);
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 100'000;
    const double big_m = supnorm(m);
    auto [theta, monotone] = detail::initial_state(m, opts);
    const double top = std::max(big_m, *std::max_element(theta.begin(), theta.end()));
    const double stop = opts.tol * std::max(1.0, big_m);
    const double slack = 1e-13 * std::max(1.0, top);
    const double res_bound = detail::residual_bound(big_m);
    const auto a = op.removal();

    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, top);
    std::vector<double> conv(theta.size());
    double last_step = std::numeric_limits<double>::infinity();
    double previous_step = std::numeric_limits<double>::infinity();
    if (observer) observer(0, theta);
    for (int k = 1; k <= max_iter + 1; ++k) {
        op.convolve(theta, conv);
        double res = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            res = std::max(res, std::abs(d * (conv[i] - a[i] * theta[i]) + theta[i] * (m[i] - theta[i])));
        }
        if (detail::settled(last_step, previous_step, stop, floor) && res <= res_bound) {
            return detail::finish(op, d, m, std::move(theta), k - 1, Method::algebraic_fp, gate);
        }
        if (k > max_iter) break;
        previous_step = last_step;
        last_step = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double b = m[i] - d * a[i];
            const double root = std::sqrt(b * b + 4.0 * d * conv[i]);
            // Rationalized branch avoids cancellation when b << 0.
            const double next = b >= 0.0 ? 0.5 * (b + root) : (root - b > 0.0 ? 2.0 * d * conv[i] / (root - b) : 0.0);
            if (monotone && next > theta[i] + slack) {
                throw StepSizeError("fixed-point iterates lost monotonicity at node " + std::to_string(i));
            }
            last_step = std::max(last_step, std::abs(next - theta[i]));
            theta[i] = next;
        }
        if (observer) observer(k, theta);
    }
    throw IterationLimitError("fixed-point iteration hit the iteration limit", theta, 0.0, max_iter);
}

inline SteadyState solve(const NonlocalOperator& op, double d, const GridFunction& m,
                         const SolverOptions& opts = {}) {
    return opts.method == Method::monotone_time ? solve_monotone(op, d, m, opts)
                                                : solve_fixed_point(op, d, m, opts);
}

}  // namespace nldisp

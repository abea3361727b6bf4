#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "nldisp/analytics.hpp"
#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/parallel.hpp"

namespace nldisp {

/// Global-mixing model  d (mean(u) - u) + u (m - u) = 0  with a positive resource.
struct MixingScenario {
    GridFunction m;
    double inf_m = 0.0;
    double sup_m = 0.0;
    double ratio = 1.0;          ///< sup m / inf m
    bool golden = false;         ///< ratio < (sqrt 5 + 1) / 2
};

inline MixingScenario make_mixing_scenario(GridFunction m) {
    const double lo = m.min();
    const double hi = m.max();
    if (!(lo > 0.0)) throw DomainError("mixing scenario needs min m > 0");
    MixingScenario s{std::move(m), lo, hi, hi / lo, false};
    s.golden = s.ratio < (std::sqrt(5.0) + 1.0) / 2.0;
    return s;
}

struct MixingState {
    double d = 0.0;
    double sbar = 0.0;  ///< spatial mean of theta
    GridFunction theta;
    double sbar_prime = std::numeric_limits<double>::quiet_NaN();
};

/// Pointwise positive root of  theta^2 - (m - d) theta - d s = 0, i.e. the steady state
/// when its own mean is s. Checks sqrt((m-d)^2 + 4ds) = 2 theta - m + d = theta + ds/theta.
inline GridFunction theta_given_mean(const GridFunction& m, double d, double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("theta_given_mean: s must be >= 0");
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("theta_given_mean: d must be > 0");
    std::vector<double> theta(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double b = m[i] - d;
        const double root = std::sqrt(b * b + 4.0 * d * s);
        double t;
        if (b >= 0.0) {
            t = 0.5 * (b + root);
        } else {
            t = root - b > 0.0 ? 2.0 * d * s / (root - b) : 0.0;
        }
        const double tol = 1e-12 * std::max(1.0, root);
        if (std::abs(root - (2.0 * t - b)) > tol || (t > 0.0 && std::abs(root - (t + d * s / t)) > tol)) {
            throw ConsistencyError("root identity violated in theta_given_mean");
        }
        theta[i] = t;
    }
    return GridFunction(m.grid_ptr(), std::move(theta));
}

/// Solves mean(theta_given_mean(m, d, s)) = s by bisection.
///
/// The bracket [inf m, sup m] has F(inf m) >= 0 >= F(sup m) and excludes the trivial
/// root s = 0. tol < 0 selects 1e-12 sup m; tol = 0 bisects to machine precision.
inline MixingState solve_mean(const MixingScenario& sc, double d, double tol = -1.0) {
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("solve_mean: d must be > 0");
    if (tol < 0.0) tol = 1e-12 * sc.sup_m;
    const auto F = [&](double s) { return mean(theta_given_mean(sc.m, d, s)) - s; };
    double lo = sc.inf_m;
    double hi = sc.sup_m;
    const double slack = 1e-14 * sc.sup_m;
    const double f_lo = F(lo);
    const double f_hi = F(hi);
    if (f_lo < -slack || f_hi > slack) throw ConsistencyError("solve_mean: bracket has no sign change");
    double s = hi;
    if (std::abs(f_lo) <= tol) {
        s = lo;
    } else if (std::abs(f_hi) > tol) {
        for (int it = 0; it < 200; ++it) {
            s = 0.5 * (lo + hi);
            if (s <= lo || s >= hi) break;
            const double f = F(s);
            if (std::abs(f) <= tol && tol > 0.0) break;
            if (f > 0.0) {
                lo = s;
            } else if (f < 0.0) {
                hi = s;
            } else {
                break;
            }
        }
    }
    return {d, s, theta_given_mean(sc.m, d, s), std::numeric_limits<double>::quiet_NaN()};
}

/// d sbar / dd = int (sbar - theta)/(2 theta - m + d) / int (2 theta - m)/(2 theta - m + d).
inline double sbar_prime(const MixingScenario& sc, double d, const MixingState& state) {
    const Grid& grid = sc.m.grid();
    const auto w = grid.weights();
    const double vol = grid.domain().volume();
    double num = 0.0, den = 0.0, leak = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = state.theta[i];
        const double q = 2.0 * t - sc.m[i] + d;
        num += w[i] * (state.sbar - t) / q;
        den += w[i] * (2.0 * t - sc.m[i]) / q;
        leak += w[i] * d / (t + d * state.sbar / t);
    }
    if (!(1.0 - leak / vol > 0.0) || !(den > 0.0)) {
        throw ConsistencyError("sbar_prime: denominator is not positive");
    }
    return num / den;
}

inline MixingState solve_mixing_state(const MixingScenario& sc, double d, double tol = -1.0) {
    auto st = solve_mean(sc, d, tol);
    st.sbar_prime = sbar_prime(sc, d, st);
    return st;
}

struct UnimodalityReport {
    bool unimodal = false;
    double argmax_d = 0.0;
    std::pair<double, double> L_bracket{0.0, 0.0};
    bool has_transition = false;       ///< a +/- transition exists inside the grid
    bool bracket_inside = false;       ///< L_bracket within (inf m, sup m)
    bool outer_bounds_hold = false;    ///< increasing below (mean m + inf m)/2, decreasing above sup m
    std::vector<std::size_t> transitions;  ///< difference indices where the sign flips
    std::vector<double> d_grid;
    std::vector<double> sbar;
    std::vector<double> sbar_prime;
};

/// Log-spaced d grid over [inf m / 4, 4 sup m].
inline std::vector<double> default_d_grid(const MixingScenario& sc, int count = 400) {
    return log_space(sc.inf_m / 4.0, 4.0 * sc.sup_m, count);
}

/// Certifies, at grid resolution, that sbar(d) rises then falls with the turn inside
/// (inf m, sup m). Differences below tol count as flat. tol < 0 selects 1e-11 sup m.
inline UnimodalityReport certify_unimodal(const MixingScenario& sc, const std::vector<double>& d_grid,
                                          double tol = -1.0, int jobs = 1) {
    if (d_grid.size() < 2) throw DomainError("certify_unimodal: need at least two d values");
    for (std::size_t k = 1; k < d_grid.size(); ++k) {
        if (!(d_grid[k] > d_grid[k - 1])) throw DomainError("certify_unimodal: d grid must be increasing");
    }
    if (tol < 0.0) tol = 1e-11 * sc.sup_m;
    const auto states = parallel_map(d_grid.size(), jobs, [&](std::size_t k) {
        return solve_mixing_state(sc, d_grid[k], 0.0);
    });
    UnimodalityReport rep;
    rep.d_grid = d_grid;
    for (const auto& st : states) {
        rep.sbar.push_back(st.sbar);
        rep.sbar_prime.push_back(st.sbar_prime);
    }
    const auto best = std::max_element(rep.sbar.begin(), rep.sbar.end()) - rep.sbar.begin();
    rep.argmax_d = d_grid[static_cast<std::size_t>(best)];

    int prev_sign = 0;
    std::size_t prev_index = 0;
    int rises_after_fall = 0;
    int falls_after_rise = 0;
    std::size_t last_plus = 0, first_minus = 0;
    for (std::size_t k = 0; k + 1 < d_grid.size(); ++k) {
        const double delta = rep.sbar[k + 1] - rep.sbar[k];
        const int sign = std::abs(delta) < tol ? 0 : (delta > 0.0 ? 1 : -1);
        if (sign == 0) continue;
        if (prev_sign != 0 && sign != prev_sign) {
            rep.transitions.push_back(k);
            if (prev_sign > 0) {
                ++falls_after_rise;
                if (falls_after_rise == 1) {
                    last_plus = prev_index;
                    first_minus = k;
                }
            } else {
                ++rises_after_fall;
            }
        }
        prev_sign = sign;
        prev_index = k;
    }
    rep.unimodal = rises_after_fall == 0 && falls_after_rise <= 1;
    rep.has_transition = falls_after_rise >= 1;
    if (rep.has_transition) {
        rep.L_bracket = {d_grid[last_plus], d_grid[first_minus + 1]};
        rep.bracket_inside = sc.inf_m < rep.L_bracket.first && rep.L_bracket.second < sc.sup_m;
    } else {
        rep.L_bracket = {d_grid.front(), d_grid.back()};
    }

    rep.outer_bounds_hold = true;
    if (sc.ratio > 1.0) {
        const double rise_limit = 0.5 * (mean(sc.m) + sc.inf_m);
        for (std::size_t k = 0; k + 1 < d_grid.size(); ++k) {
            const double delta = rep.sbar[k + 1] - rep.sbar[k];
            if (d_grid[k + 1] < rise_limit && !(delta > 0.0)) rep.outer_bounds_hold = false;
            if (d_grid[k] > sc.sup_m && !(delta < 0.0)) rep.outer_bounds_hold = false;
        }
    }
    return rep;
}

}  // namespace nldisp

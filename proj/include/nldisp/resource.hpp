#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/kernel.hpp"
#include "nldisp/operator.hpp"

namespace nldisp {

struct ConstantResource {
    double value = 1.0;
    friend bool operator==(const ConstantResource&, const ConstantResource&) = default;
};

/// base + amplitude * sin(2 pi frequency s), s the normalized first coordinate.
struct SineResource {
    double base = 1.0;
    double amplitude = 0.5;
    double frequency = 1.0;
    friend bool operator==(const SineResource&, const SineResource&) = default;
};

/// low on the first `split` fraction of axis 0, high on the rest.
struct TwoPatchResource {
    double low = 1.0;
    double high = 2.0;
    double split = 0.5;
    friend bool operator==(const TwoPatchResource&, const TwoPatchResource&) = default;
};

/// Concentrated resource a(x0)/eps on the ball of radius eps^(1/n) around x0.
struct EpsilonResource {
    Point x0{0.5, 0.5};
    double eps = 0.01;
    friend bool operator==(const EpsilonResource&, const EpsilonResource&) = default;
};

using ResourceSpec = std::variant<ConstantResource, SineResource, TwoPatchResource, EpsilonResource>;

struct ConcentratedResource {
    GridFunction m;
    double a_x0 = 0.0;          ///< removal rate read at the node nearest x0
    double radius = 0.0;        ///< eps^(1/n)
    double nominal_total = 0.0; ///< omega_n a(x0)
    double discrete_total = 0.0;
};

/// Builds the concentrated resource m_eps on a Neumann operator's grid.
///
/// Needs at least 8 nodes across the ball on every axis and the discrete total
/// within 5% of omega_n a(x0); otherwise throws ResolutionError with the
/// uniform cell counts that would suffice.
inline ConcentratedResource build_m_epsilon(const NonlocalOperator& op, const Point& x0, double eps) {
    if (op.boundary() != Boundary::neumann) throw DomainError("m_epsilon is defined through the Neumann a(x)");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("m_epsilon needs eps > 0");
    const Grid& grid = op.grid();
    const int n = grid.dim();
    const double r = std::pow(eps, 1.0 / n);
    for (int k = 0; k < n; ++k) {
        const auto& b = grid.domain().bound(k);
        if (!(x0[k] - r > b.lo && x0[k] + r < b.hi)) {
            throw DomainError("ball of radius eps^(1/n) around x0 is not inside the domain");
        }
    }
    std::vector<int> required;
    bool resolved = true;
    for (int k = 0; k < n; ++k) {
        int inside = 0;
        for (double x : grid.axis_nodes(k)) {
            if (std::abs(x - x0[k]) < r) ++inside;
        }
        required.push_back(static_cast<int>(std::ceil(9.0 * grid.domain().bound(k).length() / (2.0 * r))));
        resolved = resolved && inside >= 8;
    }
    if (!resolved) {
        throw ResolutionError("grid does not resolve the m_epsilon ball with 8 nodes per axis", required);
    }
    ConcentratedResource out{GridFunction::constant(op.grid_ptr(), 0.0), 0.0, r, 0.0, 0.0};
    out.a_x0 = op.removal()[grid.nearest_node(x0)];
    const double peak = out.a_x0 / eps;
    std::vector<double> values(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (squared_distance(grid.node(i), x0, n) < r * r) values[i] = peak;
    }
    out.m = GridFunction(op.grid_ptr(), std::move(values));
    out.nominal_total = unit_ball_volume(n) * out.a_x0;
    out.discrete_total = integrate(out.m);
    if (std::abs(out.discrete_total - out.nominal_total) > 0.05 * out.nominal_total) {
        throw ResolutionError("discrete m_epsilon total misses omega_n a(x0) by more than 5%", required);
    }
    return out;
}

/// Samples a resource preset on the operator's grid.
inline GridFunction make_resource(const ResourceSpec& spec, const NonlocalOperator& op) {
    const GridPtr& grid = op.grid_ptr();
    const Interval ax = grid->domain().bound(0);
    const auto normalized = [ax](const Point& p) { return (p[0] - ax.lo) / ax.length(); };
    GridFunction m = std::visit(
        [&](const auto& s) -> GridFunction {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantResource>) {
                return GridFunction::constant(grid, s.value);
            } else if constexpr (std::is_same_v<T, SineResource>) {
                return GridFunction::sample(grid, [&](const Point& p) {
                    return s.base + s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * normalized(p));
                });
            } else if constexpr (std::is_same_v<T, TwoPatchResource>) {
                return GridFunction::sample(grid, [&](const Point& p) {
                    return normalized(p) < s.split ? s.low : s.high;
                });
            } else {
                return build_m_epsilon(op, s.x0, s.eps).m;
            }
        },
        spec);
    if (m.min() < 0.0) throw DomainError("resource must be nonnegative");
    return m;
}

inline std::string preset_name(const ResourceSpec& spec) {
    static const char* names[] = {"constant", "sine", "two_patch", "m_epsilon"};
    return names[spec.index()];
}

}  // namespace nldisp

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nldisp/resource.hpp"
#include "nldisp/steady.hpp"

using namespace nldisp;

// Reference values from tests/oracles/steady_oracle.py (BDF integration + Newton polish).
constexpr double kSineTotal = 1.0114479890330175;
constexpr double kSpikeMin = 1.2240849822332223;
constexpr double kSpikeTotal = 5.1996622879082199;

namespace {

struct Sine {
    GridPtr grid = build_grid(Domain::unit_interval(), {256});
    NonlocalOperator op = assemble(grid, Kernel::gaussian(0.1, 1), Boundary::neumann);
    GridFunction m = make_resource(SineResource{1.0, 0.5, 1.0}, op);
};

double sup_diff(const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

SolverOptions with_method(Method m, double tol = 1e-10) {
    SolverOptions o;
    o.method = m;
    o.tol = tol;
    return o;
}

}  // namespace

TEST(Steady, ConstantResourceIsExact) {
    const auto g = build_grid(Domain({{0, 1}, {0, 1}}), {10, 10});
    const auto op = assemble(g, Kernel::gaussian(0.2, 2), Boundary::neumann);
    const auto m = GridFunction::constant(g, 1.0);
    for (double d : {0.1, 1.0, 30.0}) {
        const auto a = solve_monotone(op, d, m);
        EXPECT_LE(a.residual, 1e-12);
        EXPECT_LE(sup_diff(a.theta, m), 1e-12);
        const auto b = solve_fixed_point(op, d, m);
        EXPECT_EQ(b.iterations, 1);
        EXPECT_LE(sup_diff(b.theta, m), 1e-12);
    }
}

TEST(Steady, SineMatchesOracleAndExceedsResource) {
    Sine s;
    for (auto method : {Method::algebraic_fp, Method::monotone_time}) {
        const auto st = solve(s.op, 1.0, s.m, with_method(method, 1e-12));
        EXPECT_EQ(st.method, method);
        EXPECT_GT(integrate(st.theta), integrate(s.m));
        EXPECT_NEAR(integrate(st.theta), kSineTotal, 1e-9);
        EXPECT_LE(st.residual, 1e-9);
        EXPECT_GT(st.mu0, 0.0);
        EXPECT_LE(supnorm(st.theta), supnorm(s.m) + 1e-10);
    }
}

TEST(Steady, SmallDispersalTracksResource) {
    Sine s;
    for (auto method : {Method::algebraic_fp, Method::monotone_time}) {
        const auto st = solve(s.op, 1e-4, s.m, with_method(method));
        EXPECT_LE(sup_diff(st.theta, s.m), 1e-3);
    }
}

TEST(Steady, MethodsAgree) {
    const auto g = build_grid(Domain::unit_interval(), {160});
    for (auto mode : {Boundary::dirichlet, Boundary::neumann}) {
        const auto op = assemble(g, Kernel::gaussian(0.1, 1), mode);
        const auto m = make_resource(TwoPatchResource{0.5, 2.0, 0.4}, op);
        for (double d : {0.1, 1.0}) {
            const auto a = solve(op, d, m, with_method(Method::algebraic_fp, 1e-12));
            const auto b = solve(op, d, m, with_method(Method::monotone_time, 1e-12));
            EXPECT_LE(sup_diff(a.theta, b.theta), 1e-8) << to_string(mode) << " d=" << d;
        }
    }
}

TEST(Steady, SpikeSpreadsBeyondResource) {
    const auto g = build_grid(Domain::unit_interval(), {1000});
    const auto op = assemble(g, Kernel::gaussian(0.1, 1), Boundary::neumann);
    const auto m = build_m_epsilon(op, {0.5, 0.0}, 0.01).m;
    const auto st = solve(op, 10.0, m, with_method(Method::algebraic_fp, 1e-12));
    EXPECT_GT(st.theta.min(), 0.0);
    EXPECT_NEAR(st.theta.min(), kSpikeMin, 1e-8 * kSpikeMin);
    EXPECT_NEAR(integrate(st.theta), kSpikeTotal, 1e-8 * kSpikeTotal);
    EXPECT_LE(st.residual, 1e-9 * std::max(1.0, std::pow(supnorm(m), 2)));
    for (std::size_t i = 0; i < g->size(); ++i) {
        if (m[i] == 0.0) {
            EXPECT_GT(st.theta[i], 0.0);
        }
    }
}

TEST(Steady, UniqueFromDifferentStarts) {
    Sine s;
    const double big_m = supnorm(s.m);
    const auto ref = solve(s.op, 0.5, s.m, with_method(Method::algebraic_fp, 1e-12));

    auto twice = with_method(Method::algebraic_fp, 1e-12);
    twice.initial = std::vector<double>(s.m.size(), 2.0 * big_m);
    EXPECT_LE(sup_diff(ref.theta, solve(s.op, 0.5, s.m, twice).theta), 1e-7);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1e-3, 3.0);
    for (int trial = 0; trial < 3; ++trial) {
        auto opts = with_method(Method::monotone_time, 1e-11);
        std::vector<double> start(s.m.size());
        for (double& v : start) v = u(rng);
        opts.initial = start;
        EXPECT_LE(sup_diff(ref.theta, solve(s.op, 0.5, s.m, opts).theta), 1e-7);
    }
}

TEST(Steady, LpLadder) {
    const auto g = build_grid(Domain({{0, 1}, {0, 1}}), {24, 24});
    const auto op = assemble(g, Kernel::gaussian(0.15, 2), Boundary::neumann);
    const auto m = GridFunction::sample(g, [](const Point& p) { return 1.0 + std::cos(3 * p[0]) * p[1]; });
    for (double d : {0.05, 1.0, 20.0}) {
        const auto st = solve(op, d, m);
        for (double p : {1.0, 2.0, 4.0, 8.0}) {
            EXPECT_LE(lp_norm(st.theta, p + 1), lp_norm(m, p + 1) * (1 + 1e-8)) << "p=" << p << " d=" << d;
        }
    }
}

TEST(Steady, IteratesDecreaseAndEnergyRises) {
    Sine s;
    for (auto method : {Method::monotone_time, Method::algebraic_fp}) {
        std::vector<double> previous;
        double last_energy = -INFINITY;
        int calls = 0;
        const auto observer = [&](int k, std::span<const double> u) {
            if (!previous.empty()) {
                for (std::size_t i = 0; i < u.size(); ++i) ASSERT_LE(u[i], previous[i] + 1e-13);
            }
            previous.assign(u.begin(), u.end());
            if (method == Method::monotone_time) {
                const double e = energy(s.op, 1.0, s.m, u);
                if (k >= 1) {
                    ASSERT_GE(e, last_energy - 1e-10) << "step " << k;
                }
                last_energy = e;
            }
            ++calls;
        };
        const auto opts = with_method(method);
        const auto st = method == Method::monotone_time ? solve_monotone(s.op, 1.0, s.m, opts, observer)
                                                        : solve_fixed_point(s.op, 1.0, s.m, opts, observer);
        EXPECT_EQ(calls, st.iterations + 1);
    }
}

TEST(Steady, NoPositiveSteadyState) {
    const auto g = build_grid(Domain::unit_interval(), {128});
    const auto op = assemble(g, Kernel::gaussian(0.1, 1), Boundary::dirichlet);
    const auto m = GridFunction::constant(g, 0.01);
    for (auto method : {Method::algebraic_fp, Method::monotone_time}) {
        try {
            solve(op, 10.0, m, with_method(method));
            FAIL() << "expected NoPositiveSteadyState";
        } catch (const NoPositiveSteadyState& e) {
            EXPECT_LT(e.mu0(), 0.0);
        }
    }
    auto certify = with_method(Method::algebraic_fp);
    certify.gate = Gate::certify;
    EXPECT_THROW(solve(op, 10.0, m, certify), NoPositiveSteadyState);
}

TEST(Steady, IterationLimit) {
    Sine s;
    auto opts = with_method(Method::algebraic_fp);
    opts.max_iter = 2;
    try {
        solve(s.op, 1.0, s.m, opts);
        FAIL() << "expected IterationLimitError";
    } catch (const IterationLimitError& e) {
        EXPECT_EQ(e.best_iterate().size(), s.m.size());
        EXPECT_EQ(e.iterations(), 2);
    }
    opts.method = Method::monotone_time;
    EXPECT_THROW(solve(s.op, 1.0, s.m, opts), IterationLimitError);
}

TEST(Steady, RejectsBadOptions) {
    Sine s;
    SolverOptions o;
    o.tol = 0.0;
    EXPECT_THROW(solve(s.op, 1.0, s.m, o), DomainError);
    o = {};
    o.dt_safety = 1.0;
    EXPECT_THROW(solve_monotone(s.op, 1.0, s.m, o), DomainError);
    o = {};
    o.initial = std::vector<double>(s.m.size(), -1.0);
    EXPECT_THROW(solve(s.op, 1.0, s.m, o), DomainError);
    EXPECT_THROW(solve(s.op, -1.0, s.m, {}), DomainError);
}

TEST(Residual, Examples) {
    Sine s;
    const auto c = GridFunction::constant(s.grid, 1.3);
    EXPECT_LE(residual(s.op, 2.0, c, c), 1e-13);
    EXPECT_GT(residual(s.op, 1.0, s.m, s.m), 0.0);
}

TEST(Energy, Examples) {
    Sine s;
    EXPECT_EQ(energy(s.op, 1.0, s.m, GridFunction::constant(s.grid, 0.0)), 0.0);
    const double c = 1.7;
    const auto cf = GridFunction::constant(s.grid, c);
    EXPECT_NEAR(energy(s.op, 3.0, cf, cf), c * c * c / 6.0, 1e-13);
}

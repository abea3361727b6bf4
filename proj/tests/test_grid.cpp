#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "nldisp/grid.hpp"

using namespace nldisp;

namespace {

double sum_weights(const Grid& g) {
    const auto w = g.weights();
    return std::accumulate(w.begin(), w.end(), 0.0);
}

}  // namespace

TEST(Grid, UniformMidpointNodes) {
    const auto g = build_grid(Domain::unit_interval(), {4});
    ASSERT_EQ(g->size(), 4u);
    const double expected[] = {0.125, 0.375, 0.625, 0.875};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(g->node(i)[0], expected[i]);
        EXPECT_DOUBLE_EQ(g->weight(i), 0.25);
    }
}

TEST(Grid, TensorGrid) {
    const auto g = build_grid(Domain({{0, 1}, {0, 1}}), {2, 2});
    ASSERT_EQ(g->size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g->weight(i), 0.25);
    EXPECT_DOUBLE_EQ(g->node(g->flat_index(1, 0))[0], 0.75);
    EXPECT_DOUBLE_EQ(g->node(g->flat_index(1, 0))[1], 0.25);
}

TEST(Grid, GradedWeightsTelescope) {
    const auto g = build_grid(Domain::unit_interval(), {100}, Grading{{{0.45, 0.55}}, 10.0});
    EXPECT_NEAR(sum_weights(*g), 1.0, 1e-12);
    // 45 + 100 + 45 cells
    EXPECT_EQ(g->size(), 190u);
    for (std::size_t i = 0; i < g->size(); ++i) {
        EXPECT_GT(g->weight(i), 0.0);
        if (i > 0) {
            EXPECT_GT(g->node(i)[0], g->node(i - 1)[0]);
        }
        EXPECT_GT(g->node(i)[0], 0.0);
        EXPECT_LT(g->node(i)[0], 1.0);
    }
}

TEST(Grid, GradedTwoDimensional) {
    const Domain dom({{0, 2}, {-1, 1}});
    const auto g = build_grid(dom, {20, 30}, Grading{{{0.9, 1.1}, {-0.2, 0.3}}, 7.0});
    EXPECT_NEAR(sum_weights(*g), dom.volume(), 1e-12 * dom.volume());
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(Domain({}), DomainError);
    EXPECT_THROW(Domain({{0, 1}, {0, 1}, {0, 1}}), DomainError);
    EXPECT_THROW(Domain({{1, 1}}), DomainError);
    EXPECT_THROW(build_grid(Domain::unit_interval(), {1}), DomainError);
    EXPECT_THROW(build_grid(Domain::unit_interval(), {4, 4}), DomainError);
    EXPECT_THROW(build_grid(Domain::unit_interval(), {10}, Grading{{{0.5, 1.5}}, 2.0}), DomainError);
    EXPECT_THROW(build_grid(Domain::unit_interval(), {10}, Grading{{{0.2, 0.4}}, 0.5}), DomainError);
}

TEST(Grid, NearestNodeTiesGoLow) {
    // 0.25 sits exactly halfway between the nodes 0.125 and 0.375.
    const auto g = build_grid(Domain::unit_interval(), {4});
    EXPECT_EQ(g->nearest_node({0.25, 0.0}), 0u);
    EXPECT_EQ(g->nearest_node({0.26, 0.0}), 1u);
    EXPECT_EQ(g->nearest_node({-3.0, 0.0}), 0u);
    EXPECT_EQ(g->nearest_node({3.0, 0.0}), 3u);
    const auto g2 = build_grid(Domain({{0, 1}, {0, 1}}), {4, 4});
    EXPECT_EQ(g2->nearest_node({0.9, 0.3}), g2->flat_index(3, 1));
}

TEST(GridFunction, RejectsNonFiniteAndWrongLength) {
    const auto g = build_grid(Domain::unit_interval(), {4});
    EXPECT_THROW(GridFunction(g, {1, 2, 3}), DomainError);
    EXPECT_THROW(GridFunction(g, {1, 2, NAN, 4}), DomainError);
}

TEST(Integrate, Examples) {
    const auto g = build_grid(Domain::unit_interval(), {64});
    EXPECT_NEAR(integrate(GridFunction::constant(g, 1.0)), 1.0, 1e-12);
    const auto s = GridFunction::sample(g, [](const Point& p) { return std::sin(2 * std::numbers::pi * p[0]); });
    EXPECT_NEAR(integrate(s), 0.0, 1e-12);
    const auto g1000 = build_grid(Domain::unit_interval(), {1000});
    EXPECT_NEAR(integrate(GridFunction::sample(g1000, [](const Point& p) { return p[0] * p[0]; })), 1.0 / 3.0, 1e-6);
}

TEST(Integrate, NormsAndMeans) {
    const auto g = build_grid(Domain::unit_interval(), {64});
    const auto c = GridFunction::constant(g, -2.5);
    EXPECT_DOUBLE_EQ(supnorm(c), 2.5);
    EXPECT_NEAR(mean(c), -2.5, 1e-14);
    const auto s = GridFunction::sample(g, [](const Point& p) { return 1 + 0.5 * std::sin(2 * std::numbers::pi * p[0]); });
    EXPECT_NEAR(mean(s), 1.0, 1e-12);
    const auto g1000 = build_grid(Domain::unit_interval(), {1000});
    EXPECT_NEAR(mean(GridFunction::sample(g1000, [](const Point& p) { return p[0]; })), 0.5, 1e-6);
    EXPECT_NEAR(lp_norm(c, 2.0), 2.5, 1e-14);
}

TEST(Integrate, ConstantsExactOnManyGrids) {
    for (int n : {2, 3, 7, 64, 333}) {
        const Domain dom({{-0.3, 1.7}, {2.0, 2.5}});
        const auto g = build_grid(dom, {n, n + 1});
        EXPECT_NEAR(integrate(GridFunction::constant(g, 1.0)), dom.volume(), 1e-12 * dom.volume());
        const auto gg = build_grid(dom, {n, n}, Grading{{{0.0, 0.1}, {2.1, 2.2}}, 3.0});
        EXPECT_NEAR(integrate(GridFunction::constant(gg, 1.0)), dom.volume(), 1e-12 * dom.volume());
    }
}

TEST(Integrate, SecondOrderConvergence) {
    const auto f = [](const Point& p) { return std::exp(p[0]) * (1.0 + p[1] * p[1]); };
    const double exact = (std::exp(1.0) - 1.0) * 4.0 / 3.0;
    const Domain dom({{0, 1}, {0, 1}});
    double previous = 0.0;
    for (int n : {8, 16, 32, 64}) {
        const double err = std::abs(integrate(GridFunction::sample(build_grid(dom, {n, n}), f)) - exact);
        if (previous > 0.0) {
            EXPECT_NEAR(previous / err, 4.0, 0.8) << "n = " << n;
        }
        previous = err;
    }
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nldisp/operator.hpp"
#include "nldisp/spectral.hpp"

using namespace nldisp;

namespace {

std::vector<double> random_values(std::size_t n, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

double wdot(const Grid& g, const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += g.weight(i) * u[i] * v[i];
    return s;
}

}  // namespace

TEST(Kernel, Normalization) {
    const auto g1 = Kernel::gaussian(0.1, 1);
    EXPECT_NEAR(g1.peak(), 1.0 / std::sqrt(2 * std::numbers::pi * 0.01), 1e-12);
    const auto g2 = Kernel::gaussian(0.2, 2);
    EXPECT_NEAR(g2.peak(), 1.0 / (2 * std::numbers::pi * 0.04), 1e-12);
    EXPECT_DOUBLE_EQ(Kernel::tophat(10, 1).peak(), 0.05);
    EXPECT_NEAR(Kernel::tophat(0.5, 2).peak(), 1.0 / (std::numbers::pi * 0.25), 1e-15);
    EXPECT_EQ(Kernel::tophat(0.1, 1)({0.5, 0}, {0.65, 0}), 0.0);
    EXPECT_THROW(Kernel::gaussian(0.0, 1), DomainError);
    EXPECT_THROW(Kernel::tophat(1.0, 3), DomainError);
}

TEST(Assemble, DimensionMismatch) {
    const auto g = build_grid(Domain::unit_interval(), {8});
    EXPECT_THROW(assemble(g, Kernel::gaussian(0.1, 2), Boundary::neumann), DomainError);
}

TEST(Assemble, WideTophatRemoval) {
    for (int n : {5, 50, 500}) {
        const auto op = assemble(build_grid(Domain::unit_interval(), {n}), Kernel::tophat(10, 1), Boundary::neumann);
        for (double a : op.removal()) EXPECT_NEAR(a, 0.05, 1e-15);
    }
}

TEST(Assemble, GaussianRemovalMatchesErf) {
    const double sigma = 0.1;
    const auto g = build_grid(Domain::unit_interval(), {1000});
    const auto op = assemble(g, Kernel::gaussian(sigma, 1), Boundary::neumann);
    const auto exact = [&](double x) {
        const double s = sigma * std::sqrt(2.0);
        return 0.5 * (std::erf((1.0 - x) / s) + std::erf(x / s));
    };
    for (std::size_t i = 0; i < g->size(); ++i) {
        EXPECT_NEAR(op.removal()[i], exact(g->node(i)[0]), 1e-5);
        EXPECT_GT(op.removal()[i], 0.0);
        EXPECT_LE(op.removal()[i], 1.0 + 1e-12);
    }
    EXPECT_NEAR(op.removal()[499], 1.0, 1e-5);
    EXPECT_NEAR(op.removal()[0], 0.5, 5e-3);
}

TEST(Assemble, DirichletRemovalIsOne) {
    const auto op = assemble(build_grid(Domain({{0, 1}, {0, 2}}), {9, 7}), Kernel::gaussian(0.3, 2), Boundary::dirichlet);
    for (double a : op.removal()) EXPECT_EQ(a, 1.0);
}

TEST(Assemble, StorageSelection) {
    const auto small = build_grid(Domain::unit_interval(), {100});
    EXPECT_TRUE(assemble(small, Kernel::tophat(0.1, 1), Boundary::neumann).is_dense());
    EXPECT_FALSE(assemble(small, Kernel::tophat(0.1, 1), Boundary::neumann, {Storage::automatic, 50}).is_dense());
    const auto big = build_grid(Domain::unit_interval(), {5000});
    EXPECT_FALSE(assemble(big, Kernel::tophat(0.1, 1), Boundary::neumann).is_dense());
}

TEST(Apply, NeumannAnnihilatesConstants) {
    const auto g = build_grid(Domain({{0, 1}, {0, 1}}), {20, 20});
    for (auto st : {Storage::dense, Storage::matrix_free}) {
        const auto op = assemble(g, Kernel::gaussian(0.15, 2), Boundary::neumann, {st});
        const auto lu = op.apply(GridFunction::constant(g, 3.7));
        EXPECT_LE(supnorm(lu), 1e-13 * 3.7);
    }
}

TEST(Apply, DirichletMassDeficit) {
    const auto g = build_grid(Domain::unit_interval(), {200});
    const auto dir = assemble(g, Kernel::gaussian(0.1, 1), Boundary::dirichlet);
    const auto neu = assemble(g, Kernel::gaussian(0.1, 1), Boundary::neumann);
    const auto lu = dir.apply(GridFunction::constant(g, 1.0));
    for (std::size_t i = 0; i < g->size(); ++i) {
        EXPECT_NEAR(lu[i], neu.removal()[i] - 1.0, 1e-14);
        EXPECT_LE(lu[i], 0.0);
    }
    EXPECT_LT(lu[0], -0.4);
}

TEST(Apply, GridMismatch) {
    const auto op = assemble(build_grid(Domain::unit_interval(), {10}), Kernel::tophat(0.2, 1), Boundary::neumann);
    EXPECT_THROW(op.apply(GridFunction::constant(build_grid(Domain::unit_interval(), {10}), 1.0)), DomainError);
}

TEST(Apply, SymmetricStorage) {
    const auto g = build_grid(Domain::unit_interval(), {37}, Grading{{{0.3, 0.5}}, 3.0});
    const auto op = assemble(g, Kernel::gaussian(0.07, 1), Boundary::neumann);
    for (std::size_t i = 0; i < op.size(); ++i) {
        for (std::size_t j = 0; j < op.size(); ++j) EXPECT_EQ(op.entry(i, j), op.entry(j, i));
    }
}

class OperatorProperties : public ::testing::TestWithParam<std::tuple<int, Boundary, Storage>> {};

TEST_P(OperatorProperties, SelfAdjointAndMassConserving) {
    const auto [dim, mode, storage] = GetParam();
    const auto g = dim == 1 ? build_grid(Domain({{-1, 2}}), {150}, Grading{{{0.0, 0.4}}, 4.0})
                            : build_grid(Domain({{0, 1}, {0, 1.5}}), {18, 24});
    for (const auto& kernel : {Kernel::gaussian(0.12, dim), Kernel::tophat(0.2, dim)}) {
        const auto op = assemble(g, kernel, mode, {storage});
        for (unsigned seed = 1; seed <= 5; ++seed) {
            const auto u = random_values(g->size(), seed);
            const auto v = random_values(g->size(), seed + 100);
            std::vector<double> lu(u.size()), lv(v.size());
            op.apply(u, lu);
            op.apply(v, lv);
            const double left = wdot(*g, lu, v);
            const double right = wdot(*g, u, lv);
            EXPECT_NEAR(left, right, 1e-12 * std::max({std::abs(left), std::abs(right), 1.0}));
            if (mode == Boundary::neumann) {
                double mass = 0.0, l1 = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    mass += g->weight(i) * lu[i];
                    l1 += g->weight(i) * std::abs(u[i]);
                }
                EXPECT_NEAR(mass, 0.0, 1e-12 * l1);
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(All, OperatorProperties,
                         ::testing::Combine(::testing::Values(1, 2),
                                            ::testing::Values(Boundary::dirichlet, Boundary::neumann),
                                            ::testing::Values(Storage::dense, Storage::matrix_free)));

TEST(Apply, DenseMatchesMatrixFree) {
    const auto g1 = build_grid(Domain::unit_interval(), {400}, Grading{{{0.4, 0.6}}, 5.0});
    const auto g2 = build_grid(Domain({{0, 1}, {0, 1}}), {30, 25});
    for (const auto& g : {g1, g2}) {
        const int dim = g->dim();
        const auto u = random_values(g->size(), 7, 0.0, 2.0);
        for (const auto& kernel : {Kernel::tophat(0.1, dim), Kernel::gaussian(0.05, dim)}) {
            const auto dense = assemble(g, kernel, Boundary::neumann, {Storage::dense});
            const auto sparse = assemble(g, kernel, Boundary::neumann, {Storage::matrix_free});
            std::vector<double> a(u.size()), b(u.size());
            dense.apply(u, a);
            sparse.apply(u, b);
            // Exact agreement for the top-hat; the gaussian loses its tail beyond 6 sigma.
            const double rel = kernel.family() == KernelFamily::tophat ? 1e-13 : 1e-8;
            const double scale = supnorm(u) * dense.max_removal();
            for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(a[i], b[i], rel * scale);
        }
    }
}

TEST(Rayleigh, Examples) {
    const auto g = build_grid(Domain::unit_interval(), {128});
    const auto neu = assemble(g, Kernel::gaussian(0.1, 1), Boundary::neumann);
    const auto one = GridFunction::constant(g, 1.0);
    EXPECT_NEAR(rayleigh(neu, 2.0, GridFunction::constant(g, 0.7), one), 0.7, 1e-14);

    const auto dir = assemble(g, Kernel::gaussian(0.1, 1), Boundary::dirichlet);
    const auto zero = GridFunction::constant(g, 0.0);
    const double deficit = integrate(neu.removal_function()) - 1.0;
    EXPECT_NEAR(rayleigh(dir, 1.0, zero, one), deficit, 1e-14);
    EXPECT_LT(rayleigh(dir, 1.0, zero, one), 0.0);
    EXPECT_THROW(rayleigh(dir, 1.0, zero, zero), DomainError);
}

TEST(Rayleigh, BelowPrincipalEigenvalue) {
    const auto g = build_grid(Domain::unit_interval(), {96});
    const auto m = GridFunction::sample(g, [](const Point& p) { return 1 + std::sin(7 * p[0]); });
    for (auto mode : {Boundary::dirichlet, Boundary::neumann}) {
        const auto op = assemble(g, Kernel::gaussian(0.08, 1), mode);
        const double mu0 = principal_eigenvalue(op, 0.5, m).mu0;
        for (unsigned seed = 1; seed <= 20; ++seed) {
            const GridFunction psi(g, random_values(g->size(), seed));
            EXPECT_LE(rayleigh(op, 0.5, m, psi), mu0 + 1e-10);
        }
    }
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/kernel.hpp"

namespace nldisp {

/// Nonlocal boundary condition: what happens to jumps that would leave the domain.
enum class Boundary {
    dirichlet,  ///< a(x) = 1, jumps out of the domain are lost
    neumann     ///< a(x) = int_Omega k(y, x) dy, mass conserving
};

inline std::string to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "neumann"; }

enum class Storage { automatic, dense, matrix_free };

struct AssemblyOptions {
    Storage storage = Storage::automatic;
    /// automatic storage is dense up to this many nodes
    std::size_t dense_cap = 4096;
};

/// Discrete L u = sum_j K_ij w_j u_j - a_i u_i on a midpoint grid.
///
/// Dense storage keeps K_ij = k(x_i, x_j) (exactly symmetric, no truncation).
/// Matrix-free storage evaluates the kernel on the fly over per-axis index
/// windows |x_i - x_j| <= truncation radius on every axis, which makes the top-hat
/// kernel a banded operator. Gaussians lose only the mass outside the 6 sigma box. Both paths sum over j in ascending order.
class NonlocalOperator {
public:
    NonlocalOperator(GridPtr grid, Kernel kernel, Boundary mode, AssemblyOptions opts = {})
        : grid_(std::move(grid)), kernel_(kernel), mode_(mode) {
        if (!grid_) throw DomainError("operator needs a grid");
        if (kernel_.dim() != grid_->dim()) throw DomainError("kernel dimension does not match grid");
        const std::size_t n = grid_->size();
        dense_ = opts.storage == Storage::dense ||
                 (opts.storage == Storage::automatic && n <= opts.dense_cap);
        if (dense_) {
            matrix_.assign(n * n, 0.0);
            const auto nodes = grid_->nodes();
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    const double v = kernel_(nodes[i], nodes[j]);
                    matrix_[i * n + j] = v;
                    matrix_[j * n + i] = v;
                }
            }
        } else {
            build_windows();
        }
        if (mode_ == Boundary::dirichlet) {
            removal_.assign(n, 1.0);
        } else {
            // a_i = sum_j K_ji w_j, which equals the row sum by symmetry, so L1 = 0 exactly.
            removal_.assign(n, 0.0);
            const std::vector<double> ones(n, 1.0);
            convolve(ones, removal_);
        }
    }

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    Boundary boundary() const noexcept { return mode_; }
    bool is_dense() const noexcept { return dense_; }
    std::size_t size() const noexcept { return grid_->size(); }

    std::span<const double> removal() const noexcept { return removal_; }
    GridFunction removal_function() const { return GridFunction(grid_, removal_); }
    double max_removal() const { return *std::max_element(removal_.begin(), removal_.end()); }

    /// K_ij as used by this operator (truncated for matrix-free gaussians).
    double entry(std::size_t i, std::size_t j) const {
        if (dense_) return matrix_[i * size() + j];
        return truncated(grid_->node(i), grid_->node(j));
    }

    /// Calls f(j, K_ij) for every j that can carry a nonzero entry in row i, ascending in j.
    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        const std::size_t n = size();
        if (dense_) {
            const double* row = matrix_.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) f(j, row[j]);
            return;
        }
        const auto nodes = grid_->nodes();
        const Point& xi = nodes[i];
        if (grid_->dim() == 1) {
            const auto [lo, hi] = windows_[0][i];
            for (std::size_t j = lo; j < hi; ++j) {
                const double v = truncated(xi, nodes[j]);
                if (v != 0.0) f(j, v);
            }
            return;
        }
        const std::size_t n1 = grid_->axis_count(1);
        const std::size_t i0 = i / n1;
        const std::size_t i1 = i % n1;
        const auto [lo0, hi0] = windows_[0][i0];
        const auto [lo1, hi1] = windows_[1][i1];
        for (std::size_t j0 = lo0; j0 < hi0; ++j0) {
            for (std::size_t j1 = lo1; j1 < hi1; ++j1) {
                const std::size_t j = j0 * n1 + j1;
                const double v = truncated(xi, nodes[j]);
                if (v != 0.0) f(j, v);
            }
        }
    }

    /// out_i = sum_j K_ij w_j u_j
    void convolve(std::span<const double> u, std::span<double> out) const {
        check_size(u.size());
        check_size(out.size());
        const std::size_t n = size();
        const auto w = grid_->weights();
        std::vector<double> wu(n);
        for (std::size_t j = 0; j < n; ++j) wu[j] = w[j] * u[j];
        if (dense_) {
            for (std::size_t i = 0; i < n; ++i) {
                const double* row = matrix_.data() + i * n;
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += row[j] * wu[j];
                out[i] = s;
            }
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for_each_in_row(i, [&](std::size_t j, double k) { s += k * wu[j]; });
            out[i] = s;
        }
    }

    /// out = L u
    void apply(std::span<const double> u, std::span<double> out) const {
        convolve(u, out);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= removal_[i] * u[i];
    }

    GridFunction apply(const GridFunction& u) const {
        if (u.grid_ptr() != grid_) throw DomainError("grid function lives on a different grid");
        std::vector<double> out(size());
        apply(u.values(), out);
        return GridFunction(grid_, std::move(out));
    }

private:
    // Symmetric in (x, y): |x_k - y_k| is computed exactly the same way both ways round.
    double truncated(const Point& x, const Point& y) const noexcept {
        const double reach = kernel_.truncation_radius();
        for (int k = 0; k < grid_->dim(); ++k) {
            if (std::abs(x[k] - y[k]) > reach) return 0.0;
        }
        return kernel_(x, y);
    }

    // Windows are a superset of the support; truncated() makes the exact cut.
    void build_windows() {
        const double reach = kernel_.truncation_radius() * (1.0 + 1e-12);
        for (int k = 0; k < grid_->dim(); ++k) {
            const auto ax = grid_->axis_nodes(k);
            std::vector<std::pair<std::size_t, std::size_t>> win(ax.size());
            for (std::size_t i = 0; i < ax.size(); ++i) {
                const auto lo = std::lower_bound(ax.begin(), ax.end(), ax[i] - reach);
                const auto hi = std::upper_bound(ax.begin(), ax.end(), ax[i] + reach);
                win[i] = {static_cast<std::size_t>(lo - ax.begin()),
                          static_cast<std::size_t>(hi - ax.begin())};
            }
            windows_.push_back(std::move(win));
        }
    }

    void check_size(std::size_t n) const {
        if (n != size()) throw DomainError("vector length does not match operator size");
    }

    GridPtr grid_;
    Kernel kernel_;
    Boundary mode_;
    bool dense_ = true;
    std::vector<double> matrix_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> windows_;
    std::vector<double> removal_;
};

inline NonlocalOperator assemble(GridPtr grid, const Kernel& kernel, Boundary mode,
                                 AssemblyOptions opts = {}) {
    return NonlocalOperator(std::move(grid), kernel, mode, opts);
}

/// Rayleigh quotient int(d L[psi] psi + m psi^2) / int psi^2.
inline double rayleigh(const NonlocalOperator& op, double d, const GridFunction& m,
                       const GridFunction& psi) {
    if (m.grid_ptr() != op.grid_ptr() || psi.grid_ptr() != op.grid_ptr()) {
        throw DomainError("rayleigh: grid mismatch");
    }
    const auto w = op.grid().weights();
    std::vector<double> lpsi(op.size());
    op.apply(psi.values(), lpsi);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        num += w[i] * (d * lpsi[i] * psi[i] + m[i] * psi[i] * psi[i]);
        den += w[i] * psi[i] * psi[i];
    }
    if (!(den > 0.0)) throw DomainError("rayleigh: test function is identically zero");
    return num / den;
}

}  // namespace nldisp

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nldisp/error.hpp"

namespace nldisp {

/// A point in R^n, n <= 2. Unused trailing coordinates are zero.
using Point = std::array<double, 2>;

inline double squared_distance(const Point& x, const Point& y, int dim) noexcept {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double dx = x[k] - y[k];
        s += dx * dx;
    }
    return s;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const noexcept { return hi - lo; }
    bool contains(const Interval& other) const noexcept {
        return lo <= other.lo && other.hi <= hi;
    }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned habitat: an interval (n = 1) or a rectangle (n = 2).
class Domain {
public:
    explicit Domain(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
        if (bounds_.empty() || bounds_.size() > 2) {
            throw DomainError("domain dimension must be 1 or 2");
        }
        for (const auto& b : bounds_) {
            if (!(std::isfinite(b.lo) && std::isfinite(b.hi)) || !(b.length() > 0.0)) {
                throw DomainError("domain intervals must be finite with positive length");
            }
        }
    }

    static Domain unit_interval() { return Domain({{0.0, 1.0}}); }

    int dim() const noexcept { return static_cast<int>(bounds_.size()); }
    const Interval& bound(int axis) const { return bounds_.at(static_cast<std::size_t>(axis)); }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }

    double volume() const noexcept {
        double v = 1.0;
        for (const auto& b : bounds_) v *= b.length();
        return v;
    }

    bool contains(const Point& p) const noexcept {
        for (int k = 0; k < dim(); ++k) {
            if (p[k] < bounds_[k].lo || p[k] > bounds_[k].hi) return false;
        }
        return true;
    }

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    std::vector<Interval> bounds_;
};

/// Refinement of a single box inside the domain: spacing there is divided by `factor`.
struct Grading {
    std::vector<Interval> region;
    double factor = 1.0;

    friend bool operator==(const Grading&, const Grading&) = default;
};

/// Tensor-product midpoint-rule quadrature on a Domain.
///
/// Nodes are stored with axis 0 outermost: node (i0, i1) has flat index i0 * n1 + i1.
/// Immutable after construction; shared between grid functions via GridPtr.
class Grid {
public:
    Grid(Domain domain, std::vector<std::vector<double>> axis_edges)
        : domain_(std::move(domain)) {
        const auto dim = static_cast<std::size_t>(domain_.dim());
        if (axis_edges.size() != dim) throw DomainError("one edge list per axis required");
        for (auto& edges : axis_edges) {
            std::vector<double> mid, width;
            for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
                mid.push_back(0.5 * (edges[k] + edges[k + 1]));
                width.push_back(edges[k + 1] - edges[k]);
            }
            axis_nodes_.push_back(std::move(mid));
            axis_weights_.push_back(std::move(width));
        }
        const std::size_t n0 = axis_nodes_[0].size();
        const std::size_t n1 = dim == 2 ? axis_nodes_[1].size() : 1;
        nodes_.reserve(n0 * n1);
        weights_.reserve(n0 * n1);
        for (std::size_t i = 0; i < n0; ++i) {
            for (std::size_t j = 0; j < n1; ++j) {
                if (dim == 2) {
                    nodes_.push_back({axis_nodes_[0][i], axis_nodes_[1][j]});
                    weights_.push_back(axis_weights_[0][i] * axis_weights_[1][j]);
                } else {
                    nodes_.push_back({axis_nodes_[0][i], 0.0});
                    weights_.push_back(axis_weights_[0][i]);
                }
            }
        }
    }

    const Domain& domain() const noexcept { return domain_; }
    int dim() const noexcept { return domain_.dim(); }
    std::size_t size() const noexcept { return nodes_.size(); }

    const Point& node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const Point> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    std::size_t axis_count(int axis) const { return axis_nodes_.at(static_cast<std::size_t>(axis)).size(); }
    std::span<const double> axis_nodes(int axis) const { return axis_nodes_.at(static_cast<std::size_t>(axis)); }
    std::span<const double> axis_weights(int axis) const { return axis_weights_.at(static_cast<std::size_t>(axis)); }

    std::size_t flat_index(std::size_t i0, std::size_t i1) const noexcept {
        return dim() == 2 ? i0 * axis_nodes_[1].size() + i1 : i0;
    }

    /// Index of the node closest to p (Euclidean).
    std::size_t nearest_node(const Point& p) const {
        std::size_t idx[2] = {0, 0};
        for (int k = 0; k < dim(); ++k) {
            const auto& ax = axis_nodes_[static_cast<std::size_t>(k)];
            auto it = std::lower_bound(ax.begin(), ax.end(), p[k]);
            std::size_t j = static_cast<std::size_t>(it - ax.begin());
            if (j == ax.size() || (j > 0 && p[k] - ax[j - 1] <= ax[j] - p[k])) --j;
            idx[k] = j;
        }
        return flat_index(idx[0], idx[1]);
    }

private:
    Domain domain_;
    std::vector<std::vector<double>> axis_nodes_;
    std::vector<std::vector<double>> axis_weights_;
    std::vector<Point> nodes_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

namespace detail {

inline void append_uniform(std::vector<double>& edges, double lo, double hi, int cells) {
    for (int k = 1; k < cells; ++k) {
        edges.push_back(lo + (hi - lo) * static_cast<double>(k) / cells);
    }
    edges.push_back(hi);
}

// Cell edges for one axis. The refinement interval's endpoints are always edges,
// so the partition telescopes exactly to [lo, hi].
inline std::vector<double> axis_edges(const Interval& axis, int count,
                                      const Interval* refine, double factor) {
    std::vector<double> edges{axis.lo};
    const double h = axis.length() / count;
    if (refine == nullptr) {
        append_uniform(edges, axis.lo, axis.hi, count);
        return edges;
    }
    const auto cells_for = [&](double len, double spacing) {
        return std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-9)));
    };
    if (refine->lo > axis.lo) append_uniform(edges, axis.lo, refine->lo, cells_for(refine->lo - axis.lo, h));
    append_uniform(edges, refine->lo, refine->hi, cells_for(refine->length(), h / factor));
    if (refine->hi < axis.hi) append_uniform(edges, refine->hi, axis.hi, cells_for(axis.hi - refine->hi, h));
    return edges;
}

}  // namespace detail

/// Midpoint-rule grid with `counts[k]` cells along axis k, optionally refined in one box.
inline GridPtr build_grid(const Domain& domain, const std::vector<int>& counts,
                          const std::optional<Grading>& grading = std::nullopt) {
    if (counts.size() != static_cast<std::size_t>(domain.dim())) {
        throw DomainError("need one cell count per axis");
    }
    for (int c : counts) {
        if (c < 2) throw DomainError("cell counts must be >= 2 per axis");
    }
    if (grading) {
        if (grading->region.size() != counts.size()) {
            throw DomainError("refinement region dimension does not match domain");
        }
        if (!(grading->factor >= 1.0) || !std::isfinite(grading->factor)) {
            throw DomainError("refinement factor must be >= 1");
        }
        for (int k = 0; k < domain.dim(); ++k) {
            const auto& r = grading->region[static_cast<std::size_t>(k)];
            if (!(r.length() > 0.0) || !domain.bound(k).contains(r)) {
                throw DomainError("refinement region must be a non-empty box inside the domain");
            }
        }
    }
    std::vector<std::vector<double>> edges;
    for (int k = 0; k < domain.dim(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const Interval* refine = grading ? &grading->region[ku] : nullptr;
        edges.push_back(detail::axis_edges(domain.bound(k), counts[ku], refine,
                                           grading ? grading->factor : 1.0));
    }
    return std::make_shared<const Grid>(domain, std::move(edges));
}

/// Real values at the nodes of a grid (resource m, density theta, eigenvectors...).
class GridFunction {
public:
    GridFunction(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw DomainError("grid function needs a grid");
        if (values_.size() != grid_->size()) throw DomainError("value count does not match node count");
        for (double v : values_) {
            if (!std::isfinite(v)) throw DomainError("grid function values must be finite");
        }
    }

    static GridFunction constant(GridPtr grid, double c) {
        const auto n = grid->size();
        return GridFunction(std::move(grid), std::vector<double>(n, c));
    }

    static GridFunction sample(GridPtr grid, const std::function<double(const Point&)>& f) {
        std::vector<double> v;
        v.reserve(grid->size());
        for (const auto& p : grid->nodes()) v.push_back(f(p));
        return GridFunction(std::move(grid), std::move(v));
    }

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_grid(const GridFunction& other) const noexcept { return grid_ == other.grid_; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Quadrature sum_i w_i f_i with Neumaier compensation, so constants integrate to |Omega|
/// at roundoff level on large grids.
inline double integrate(const Grid& grid, std::span<const double> f) {
    double s = 0.0;
    double c = 0.0;
    const auto w = grid.weights();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double term = w[i] * f[i];
        const double t = s + term;
        c += std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
        s = t;
    }
    return s + c;
}

inline double integrate(const GridFunction& f) { return integrate(f.grid(), f.values()); }

inline double supnorm(std::span<const double> f) {
    double s = 0.0;
    for (double v : f) s = std::max(s, std::abs(v));
    return s;
}

inline double supnorm(const GridFunction& f) { return supnorm(f.values()); }

inline double mean(const GridFunction& f) { return integrate(f) / f.grid().domain().volume(); }

/// Quadrature L^p norm, (sum_i w_i |f_i|^p)^(1/p).
inline double lp_norm(const GridFunction& f, double p) {
    double s = 0.0;
    const auto w = f.grid().weights();
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), p);
    return std::pow(s, 1.0 / p);
}

}  // namespace nldisp

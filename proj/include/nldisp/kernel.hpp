#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"

namespace nldisp {

enum class KernelFamily { gaussian, tophat, uniform };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::tophat: return "tophat";
        case KernelFamily::uniform: return "uniform";
    }
    return "?";
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int dim) {
    if (dim == 1) return 2.0;
    if (dim == 2) return std::numbers::pi;
    throw DomainError("unit ball volume only for n = 1, 2");
}

/// Symmetric radial dispersal kernel k(x, y) = g(|x - y|).
///
/// gaussian and tophat integrate to one over the whole of R^n, so the
/// Neumann removal rate a(x) drops below one near the boundary. The uniform
/// kernel k = 1/|Omega| is normalized over the domain instead and gives the
/// global-mixing operator  u -> mean(u) - u.
class Kernel {
public:
    static Kernel gaussian(double sigma, int dim) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian sigma must be > 0");
        check_dim(dim);
        Kernel k(KernelFamily::gaussian, sigma, dim);
        k.scale_ = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * dim);
        k.inv_two_var_ = 1.0 / (2.0 * sigma * sigma);
        return k;
    }

    static Kernel tophat(double radius, int dim) {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("tophat radius must be > 0");
        check_dim(dim);
        Kernel k(KernelFamily::tophat, radius, dim);
        k.scale_ = 1.0 / (unit_ball_volume(dim) * std::pow(radius, dim));
        return k;
    }

    static Kernel uniform(double domain_volume, int dim) {
        if (!(domain_volume > 0.0)) throw DomainError("uniform kernel needs a positive volume");
        check_dim(dim);
        Kernel k(KernelFamily::uniform, domain_volume, dim);
        k.scale_ = 1.0 / domain_volume;
        return k;
    }

    KernelFamily family() const noexcept { return family_; }
    /// sigma (gaussian), radius (tophat) or domain volume (uniform).
    double parameter() const noexcept { return param_; }
    int dim() const noexcept { return dim_; }

    /// k as a function of the squared distance.
    double of_squared_distance(double r2) const noexcept {
        switch (family_) {
            case KernelFamily::gaussian: return scale_ * std::exp(-r2 * inv_two_var_);
            case KernelFamily::tophat: return r2 < param_ * param_ ? scale_ : 0.0;
            case KernelFamily::uniform: return scale_;
        }
        return 0.0;
    }

    double operator()(const Point& x, const Point& y) const noexcept {
        return of_squared_distance(squared_distance(x, y));
    }

    /// k(x, x); also the sup norm of k.
    double peak() const noexcept { return scale_; }

    /// Support radius used by matrix-free application. Gaussians are cut at 6 sigma.
    double truncation_radius() const noexcept {
        switch (family_) {
            case KernelFamily::gaussian: return 6.0 * param_;
            case KernelFamily::tophat: return param_;
            case KernelFamily::uniform: return std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }

    double squared_distance(const Point& x, const Point& y) const noexcept {
        return nldisp::squared_distance(x, y, dim_);
    }

private:
    Kernel(KernelFamily f, double param, int dim) : family_(f), param_(param), dim_(dim) {}

    static void check_dim(int dim) {
        if (dim != 1 && dim != 2) throw DomainError("kernel dimension must be 1 or 2");
    }

    KernelFamily family_;
    double param_;
    int dim_;
    double scale_ = 0.0;
    double inv_two_var_ = 0.0;
};

}  // namespace nldisp

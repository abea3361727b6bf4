#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nldisp/error.hpp"
#include "nldisp/grid.hpp"
#include "nldisp/operator.hpp"

namespace nldisp {

struct EigenResult {
    double mu0 = 0.0;
    GridFunction eigenvector;  ///< int psi^2 = 1, positive first entry
    int iterations = 0;
    double residual = 0.0;     ///< || (dL + m) psi - mu0 psi ||_2 / || psi ||_2
};

namespace detail {

// Weighted inner product <u, v> = sum_i w_i u_i v_i; the operator dL + m is self-adjoint in it.
inline double wdot(std::span<const double> w, std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u[i] * v[i];
    return s;
}

inline void check_eigen_inputs(const NonlocalOperator& op, double d, const GridFunction& m) {
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("dispersal rate d must be > 0");
    if (m.grid_ptr() != op.grid_ptr()) throw DomainError("resource lives on a different grid");
}

// Positive start vector; constant when m is constant.
inline std::vector<double> start_vector(const GridFunction& m) {
    const double top = std::max(supnorm(m), 1.0);
    std::vector<double> psi(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) psi[i] = std::max(m[i], 0.0) + 0.1 * top;
    return psi;
}

struct PowerStep {
    double rayleigh;
    double residual;
};

// One step of psi <- (A + cI) psi / ||.||, A = dL + diag(m). psi must be normalized on entry.
inline PowerStep power_step(const NonlocalOperator& op, double d, const GridFunction& m, double shift,
                            std::vector<double>& psi, std::vector<double>& work) {
    const auto w = op.grid().weights();
    op.apply(psi, work);
    for (std::size_t i = 0; i < psi.size(); ++i) work[i] = d * work[i] + m[i] * psi[i];
    const double mu = wdot(w, psi, work);
    double res2 = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double r = work[i] - mu * psi[i];
        res2 += w[i] * r * r;
    }
    for (std::size_t i = 0; i < psi.size(); ++i) work[i] += shift * psi[i];
    const double norm = std::sqrt(wdot(w, work, work));
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = work[i] / norm;
    return {mu, std::sqrt(res2)};
}

inline void normalize(std::span<const double> w, std::vector<double>& psi) {
    const double norm = std::sqrt(wdot(w, psi, psi));
    for (double& v : psi) v /= norm;
}

}  // namespace detail

/// Principal eigenvalue mu0 of dL + m by shifted power iteration.
///
/// The shift c = d max(a) + sup|m| makes A + cI entrywise nonnegative, so the
/// principal eigenvalue is the dominant one. Converged when both the eigenvalue
/// increment and the residual drop to tol * max(1, |mu0|).
inline EigenResult principal_eigenvalue(const NonlocalOperator& op, double d, const GridFunction& m,
                                        double tol = 1e-10, int max_iter = 1'000'000) {
    detail::check_eigen_inputs(op, d, m);
    if (!(tol > 0.0) || max_iter < 1) throw DomainError("principal_eigenvalue: need tol > 0, max_iter >= 1");
    const auto w = op.grid().weights();
    const double shift = d * op.max_removal() + supnorm(m);
    std::vector<double> psi = detail::start_vector(m);
    std::vector<double> work(psi.size());
    detail::normalize(w, psi);

    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        // Keep the pre-step vector: the Rayleigh quotient and residual belong to it.
        std::vector<double> current = psi;
        const auto step = detail::power_step(op, d, m, shift, psi, work);
        const double scale = std::max(1.0, std::abs(step.rayleigh));
        if (std::abs(step.rayleigh - previous) <= tol * scale && step.residual <= tol * scale) {
            if (current.front() < 0.0) {
                for (double& v : current) v = -v;
            }
            return {step.rayleigh, GridFunction(op.grid_ptr(), std::move(current)), it, step.residual};
        }
        previous = step.rayleigh;
    }
    throw IterationLimitError("power iteration did not converge", psi, previous, max_iter);
}

struct PositivityCertificate {
    bool positive = false;
    double bound = 0.0;     ///< lower bound on mu0 (positive) or converged mu0 (not positive)
    bool converged = false; ///< bound is mu0 itself
    int iterations = 0;
};

/// Decides mu0 > threshold without necessarily converging: every Rayleigh quotient is a
/// lower bound on mu0, so the iteration stops at the first quotient above the threshold.
inline PositivityCertificate certify_positive(const NonlocalOperator& op, double d, const GridFunction& m,
                                              double threshold, double tol = 1e-10,
                                              int max_iter = 1'000'000) {
    detail::check_eigen_inputs(op, d, m);
    const auto w = op.grid().weights();
    const double shift = d * op.max_removal() + supnorm(m);
    std::vector<double> psi = detail::start_vector(m);
    std::vector<double> work(psi.size());
    detail::normalize(w, psi);
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        const auto step = detail::power_step(op, d, m, shift, psi, work);
        if (step.rayleigh > threshold) return {true, step.rayleigh, false, it};
        const double scale = std::max(1.0, std::abs(step.rayleigh));
        if (std::abs(step.rayleigh - previous) <= tol * scale && step.residual <= tol * scale) {
            return {false, step.rayleigh, true, it};
        }
        previous = step.rayleigh;
    }
    throw IterationLimitError("positivity certificate did not converge", psi, previous, max_iter);
}

/// Full spectrum (ascending) of W^{1/2} (d K W - d diag(a) + diag(m)) W^{-1/2}.
/// Dense test oracle, limited to 2048 nodes.
inline std::vector<double> dense_spectrum_oracle(const NonlocalOperator& op, double d, const GridFunction& m) {
    detail::check_eigen_inputs(op, d, m);
    const std::size_t n = op.size();
    if (n > 2048) throw DomainError("dense spectrum oracle limited to 2048 nodes");
    const auto w = op.grid().weights();
    const auto a = op.removal();
    Eigen::MatrixXd s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                d * std::sqrt(w[i]) * op.entry(i, j) * std::sqrt(w[j]);
        }
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += m[i] - d * a[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConsistencyError("dense eigensolver failed");
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

}  // namespace nldisp

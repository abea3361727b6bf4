#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nldisp {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad domain, mismatched grids, violated preconditions.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A grid is too coarse for the requested construction.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& what, std::vector<int> required_counts)
        : Error(what), required_counts_(std::move(required_counts)) {}

    const std::vector<int>& required_counts() const noexcept { return required_counts_; }

private:
    std::vector<int> required_counts_;
};

/// An iterative method ran out of iterations. Carries its best iterate.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, std::vector<double> best_iterate,
                        double best_value, int iterations)
        : Error(what),
          best_iterate_(std::move(best_iterate)),
          best_value_(best_value),
          iterations_(iterations) {}

    const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
    double best_value() const noexcept { return best_value_; }
    int iterations() const noexcept { return iterations_; }

private:
    std::vector<double> best_iterate_;
    double best_value_;
    int iterations_;
};

/// mu0 <= tol: the logistic problem has no positive steady state.
class NoPositiveSteadyState : public Error {
public:
    NoPositiveSteadyState(const std::string& what, double mu0) : Error(what), mu0_(mu0) {}

    double mu0() const noexcept { return mu0_; }

private:
    double mu0_;
};

/// Explicit time stepping lost monotonicity; indicates a step-size bug.
class StepSizeError : public Error {
public:
    using Error::Error;
};

/// An internal consistency check failed (bracket signs, denominators).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace nldisp

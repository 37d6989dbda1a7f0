#pragma once

#include <stdexcept>
#include <string>

namespace ccp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or a violated precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// Hyperparameter search could not meet the requested tolerance.
class FitError : public Error {
public:
    using Error::Error;
};

/// An internal invariant did not hold; indicates a bug or numerical breakdown.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Both the target and the prediction are constant in one dimension, so the
/// NRMSE denominator vanishes.
class DegenerateVarianceError : public InputError {
public:
    DegenerateVarianceError(std::size_t dimension)
        : InputError("zero variance in both series for dimension " + std::to_string(dimension)),
          dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

} // namespace ccp

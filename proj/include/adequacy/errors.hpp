#pragma once

#include <stdexcept>
#include <string>

namespace adequacy {

/// Bad input: malformed files, out-of-range parameters, broken invariants.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs were valid but the requested computation has no answer
/// (calibration bracket not found, procurement optimum on a bound).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationInfeasible : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class BoundarySolution : public ComputationError {
public:
    enum class Bound { lower, upper };

    BoundarySolution(Bound bound, const std::string& what)
        : ComputationError(what), bound_(bound) {}

    Bound bound() const noexcept { return bound_; }

private:
    Bound bound_;
};

}  // namespace adequacy

#pragma once

#include <stdexcept>
#include <string>

namespace stars {

/// Configuration or input validation failure (CLI exit code 1).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A runtime guarantee of the method was violated (CLI exit code 2).
struct ContractViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Interpolation set condition number above the 1e12 threshold.
struct DegenerateGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The blackbox produced a non-finite value; message carries the point.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace stars

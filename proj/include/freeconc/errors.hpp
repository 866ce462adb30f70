#pragma once

#include <stdexcept>
#include <string>

namespace freeconc {

/// Malformed matrix/vector dimensions.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Non-finite values or loss of numeric validity.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative scheme failed to reach its tolerance within its cap.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration file or CLI arguments.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace freeconc

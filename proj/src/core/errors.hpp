#pragma once

#include <stdexcept>
#include <string>

namespace mln {

// Bad user-facing parameters (geometry sizes, s range, config keys).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Grid function used with an incompatible node set.
struct TagMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (factorization failure, eigensolver non-convergence).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mln

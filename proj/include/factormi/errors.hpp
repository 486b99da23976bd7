#pragma once

#include <stdexcept>
#include <string>

namespace factormi {

// Error taxonomy. The CLI maps these to exit codes:
// ConfigError -> 2, DataError -> 3, everything numeric/contract -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad files, missing trials, labels out of range.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor dimension mismatches.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Misuse of the autodiff tape (detached tensors, double backward, ...).
struct TapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values, singular matrices, degenerate statistics.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace factormi

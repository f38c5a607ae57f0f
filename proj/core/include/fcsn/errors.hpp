#pragma once

#include <stdexcept>
#include <string>

namespace fcsn {

/// Malformed or inconsistent data on disk (bad magic, truncation, length mismatch).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values where finite ones are required (e.g. exploding gradients).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fcsn

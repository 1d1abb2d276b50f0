#pragma once

#include <stdexcept>
#include <string>

namespace scdgn {

/// Bad configuration: unknown keys, invalid hyper-parameter combinations,
/// missing paths. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data. Maps to CLI exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values surfaced during training or evaluation. Maps to CLI
/// exit code 4.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace scdgn

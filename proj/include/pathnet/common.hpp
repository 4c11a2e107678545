#pragma once

#include <stdexcept>
#include <string>

namespace pathnet {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy, mapped to CLI exit codes:
//   ConfigError   -> 1 (bad usage, bad config file, infeasible settings)
//   DataError     -> 2 (malformed or inconsistent input data)
//   NumericError  -> 3 (NaN/Inf reached a checked value)
// ContractError signals a broken internal precondition and also maps to 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace pathnet

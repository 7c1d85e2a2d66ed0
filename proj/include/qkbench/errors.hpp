#pragma once

#include <stdexcept>
#include <string>

namespace qkbench {

// Base for all library failures. The CLI maps each subclass onto an exit code.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or contract violation by the caller (exit code 2).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Malformed or degenerate input data (exit code 3).
class DataError : public Error {
  public:
    using Error::Error;
};

// Internal consistency failure of a numerical routine (exit code 4).
class NumericalError : public Error {
  public:
    using Error::Error;
};

// 2, 3 or 4 for the classes above; anything else counts as a numerical failure.
inline int exit_code_for(const std::exception &e) {
    if (dynamic_cast<const ConfigError *>(&e)) return 2;
    if (dynamic_cast<const DataError *>(&e)) return 3;
    return 4;
}

}  // namespace qkbench

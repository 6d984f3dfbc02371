#pragma once

#include <stdexcept>
#include <string>

namespace netlife {

// Error taxonomy mirrors the CLI exit codes: config errors (1), infeasible
// instances (2), numerical failures (3).

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace netlife

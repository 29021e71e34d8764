#pragma once

#include <stdexcept>
#include <string>

namespace arcvc {

// Invalid configuration (bad dimensions, out-of-range parameters, malformed
// config files). CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse: calling an operation in a state where it is not defined
// (stepping a terminal episode, gambling at fortune 0, ...).
struct UsageError : std::logic_error {
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Numerical failure during training (non-finite gradients or parameters).
// CLI maps a diverged run to exit code 2.
struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate curve fit (shaping). CLI maps this to exit code 3.
struct FitError : std::runtime_error {
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace arcvc

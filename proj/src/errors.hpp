// Exception taxonomy shared by all modules. Argument-domain violations use
// std::domain_error / std::out_of_range directly.
#pragma once

#include <stdexcept>

namespace qrnglab {

// Internal consistency violated: normalization drift, approximation used
// outside its validity range, and similar model-level failures.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The grid cannot represent the requested quantity at the configured
// resolution or within the point budget.
struct ResolutionError : ModelError {
  using ModelError::ModelError;
};

// A survival probability underflowed where a ratio of survivals is needed.
struct NumericError : ModelError {
  using ModelError::ModelError;
};

// Too few simulated outcomes to form the requested estimate.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration (CLI flags, config files, extractor
// parameter sets).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qrnglab

#pragma once

#include <stdexcept>
#include <string>

namespace lcsrl {

struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Raised when some (state, action) pair has no advocating classifier.
struct CoverageGapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lcsrl

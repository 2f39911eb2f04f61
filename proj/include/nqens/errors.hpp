#pragma once

#include <stdexcept>
#include <string>

namespace nqens {

// Bad invocation or configuration (CLI exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent input data (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric breakdown: divergence, non-finite results (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nqens

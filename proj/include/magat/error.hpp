#pragma once

#include <stdexcept>
#include <string>

namespace magat {

// Violations of data contracts: malformed files, shape mismatches,
// unknown labels/sites, preconditions on inputs. CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures: diverging training, degenerate variances. CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace magat

#pragma once

#include <stdexcept>
#include <string>

namespace quadforge {

// Violated precondition or malformed input. The CLI maps this to exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-convergence, singular evaluation, empty bracket.
// The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace quadforge

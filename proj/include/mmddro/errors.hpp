#pragma once

#include <stdexcept>

namespace mmddro {

// Numerical breakdown (indefinite quadratic form, singular solve beyond the
// jitter ladder, non-finite objective). Kept distinct from invalid_argument:
// the CLI maps argument/file errors to exit code 1 and these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmddro

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disrec {

// Bad input data or configuration. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-convergence, NaN loss and similar numerical failures. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double last_residual = 0.0)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace disrec

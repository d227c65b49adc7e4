#pragma once

#include <stdexcept>
#include <string>

namespace betalab {

/// A precondition on an argument was violated (bad order p, N < 2, empty window...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), residual_(last_residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace betalab

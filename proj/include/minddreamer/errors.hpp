#pragma once

#include <stdexcept>
#include <string>

namespace md {

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown by iterative solvers that hit their sweep cap; carries the last residual.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& message, double residual_value)
      : std::runtime_error(message + " (residual " + std::to_string(residual_value) + ")"),
        residual(residual_value) {}
  double residual;
};

}  // namespace md

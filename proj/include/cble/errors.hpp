#pragma once

#include <stdexcept>
#include <string>

namespace cble {

// Thrown when an iterative numerical procedure fails to reach its
// tolerance (quadrature non-convergence, non-stabilizing limits, step-size
// underflow). The message carries the residual or the offending sequence.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cble

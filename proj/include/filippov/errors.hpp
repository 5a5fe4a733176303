#pragma once

#include <stdexcept>
#include <string>

namespace filippov {

/// Malformed expression text. `position` is a 0-based byte offset into the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::size_t position)
      : std::runtime_error(std::move(msg)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation left the function's domain (log of nonpositive, division by
/// zero, non-finite result).
class DomainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structural derivative requested at a kink of abs/min/max.
class NondifferentiableError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem definition violates a load-time invariant.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integration could not continue (step underflow, Zeno accumulation).
class SolverError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Radius schedule exhausted before successive hulls converged.
class ConvergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace filippov

#ifndef GRADCERT_ERRORS_HPP_
#define GRADCERT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradcert {

/// Bad input: dimension mismatch, out-of-range parameter, malformed spec.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A malformed token in a textual spec. Carries the 0-based character offset.
class ParseError : public ArgumentError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ArgumentError(what + " (at position " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Base for failures of the numerics themselves (as opposed to bad input).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// eval/grad produced inf or NaN.
class NumericOverflowError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Adaptive integrator step collapsed below its floor.
class StiffnessError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Not enough usable samples to fit an estimate.
class InsufficientDataError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace gradcert

#endif  // GRADCERT_ERRORS_HPP_

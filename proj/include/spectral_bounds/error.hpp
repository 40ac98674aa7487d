#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spectral_bounds {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed field expression. `offset()` is the 0-based byte offset of the
/// offending token in the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Expression evaluation produced NaN or infinity.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or violated precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A spectrum does not cover the requested index or energy range.
class InsufficientSpectrum : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failed to converge or the problem is too large for the method.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Numerical integration failed or produced tables that violate monotonicity
/// or convexity.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

}  // namespace spectral_bounds

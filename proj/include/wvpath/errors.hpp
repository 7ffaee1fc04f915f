#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wvpath {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(actual)) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when the transition amplitude between the boundary states is too
/// small for a weak value to be meaningful.
class OrthogonalBoundaryStates : public Error {
 public:
  explicit OrthogonalBoundaryStates(double modulus)
      : Error("boundary states are (nearly) orthogonal: |<f|U|i>| = " + std::to_string(modulus)),
        modulus_(modulus) {}

  double denominator_modulus() const noexcept { return modulus_; }

 private:
  double modulus_;
};

/// Exact path enumeration would exceed the configured cap.
class EnumerationCapExceeded : public Error {
 public:
  EnumerationCapExceeded(double paths, double cap)
      : Error("path enumeration needs " + std::to_string(paths) + " paths (cap " +
              std::to_string(cap) + "); use metropolis_sample instead"),
        paths_(paths) {}

  double paths() const noexcept { return paths_; }

 private:
  double paths_;
};

/// The Metropolis chain never accepted a move during burn-in.
class SamplerStalled : public Error {
 public:
  using Error::Error;
};

}  // namespace wvpath

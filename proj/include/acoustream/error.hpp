#pragma once

#include <stdexcept>
#include <string>

namespace acoustream {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-physical or out-of-range inputs.
class DomainError : public Error {
 public:
  using Error::Error;
};

// ky = 0 where a paraxial formula needs 1/ky.
class ParaxialSingularity : public DomainError {
 public:
  using DomainError::DomainError;
};

// Spectral data that is not the transform of a real field.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

// Integration constant cannot be fixed (field does not decay).
class GaugeError : public Error {
 public:
  using Error::Error;
};

// Step size or sign of a diffusivity makes an integrator unstable.
class StabilityError : public Error {
 public:
  using Error::Error;
};

// Solution blew up during integration.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed material or scenario file. Carries the line when known.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace acoustream

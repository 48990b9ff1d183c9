#pragma once

#include <stdexcept>
#include <string>

namespace kdv5 {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters detected before any computation (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical or algebraic failure during a computation (CLI exit code 1).
class MathError : public Error {
 public:
  using Error::Error;
};

// series recurrence
class StructuralFailure : public MathError {
 public:
  using MathError::MathError;
};

class ResourceLimit : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// evaluation near a pole of sech^2
class PoleProximity : public MathError {
 public:
  using MathError::MathError;
};

class InsufficientData : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class QuadratureFailure : public MathError {
 public:
  QuadratureFailure(const std::string& what, double lo, double hi)
      : MathError(what), worst_lo(lo), worst_hi(hi) {}
  double worst_lo;
  double worst_hi;
};

// BVP solver
class NonConvergence : public MathError {
 public:
  using MathError::MathError;
};

class IllConditioned : public MathError {
 public:
  using MathError::MathError;
};

class ResolutionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class WindowContaminated : public MathError {
 public:
  using MathError::MathError;
};

class PoorFit : public MathError {
 public:
  using MathError::MathError;
};

}  // namespace kdv5

#pragma once

#include <stdexcept>
#include <string>

namespace latq {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches: non-square Hessian, block size not dividing n,
// odd length where pairs are required, vector length vs codebook dim, ...
class SizeError : public Error {
 public:
  using Error::Error;
};

// Semantic validation failures on inputs: non-symmetric or indefinite
// Hessian, unknown codebook id, malformed scheme, bad CLI arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numerical failures: Cholesky pivot breakdown even after regularization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Base for artifact decoding problems; subclasses distinguish the cause.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedArtifactError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace latq

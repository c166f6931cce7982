#pragma once

#include <stdexcept>
#include <string>

namespace ffthom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction arguments (grid sizes, tensors, parameters).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two operands live on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// An inverse transform produced a field with a significant imaginary part.
/// Signals that a conjugate-symmetry violation happened upstream.
class NonNegligibleImaginaryPart : public Error {
 public:
  using Error::Error;
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

/// Initial perturbation handed to a Krylov solver does not lie in E.
class InitialVectorNotInE : public Error {
 public:
  using Error::Error;
};

/// p . (I+B) p <= 0 or a vanishing BiCG inner product.
class BreakdownDetected : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

/// Malformed voxel file or run configuration. The message carries the
/// offending field path for configuration errors.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ffthom

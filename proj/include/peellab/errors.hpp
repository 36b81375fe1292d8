#pragma once

#include <stdexcept>
#include <string>

namespace peellab {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInput : Error {
  int affine_dim = -1;
  DegenerateInput(const std::string& what, int adim) : Error(what), affine_dim(adim) {}
};

struct Unbounded : Error { using Error::Error; };
struct NotSimple : Error { using Error::Error; };
struct OutOfRegime : Error { using Error::Error; };
struct RegimeViolation : Error { using Error::Error; };
struct NonPositiveCoordinate : Error { using Error::Error; };
struct LayerMissing : Error { using Error::Error; };
struct BoundaryPoint : Error { using Error::Error; };
struct NonIntegerLevel : Error { using Error::Error; };
struct InsufficientReplications : Error { using Error::Error; };

struct SchemaError : Error {
  std::string key;
  SchemaError(std::string k, const std::string& msg) : Error(k + ": " + msg), key(std::move(k)) {}
};

}  // namespace peellab

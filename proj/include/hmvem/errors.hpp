#pragma once

#include <stdexcept>
#include <string>

namespace hmvem {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TensorError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or invalid geometry: zero measure, empty kernel, singular
/// local systems caused by element shape.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed mesh file or incidence data.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// (n, m, k) outside the supported range.
class UnsupportedConfig : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmvem

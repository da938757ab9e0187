#pragma once

#include <stdexcept>
#include <string>

namespace tdem {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or unreadable/unwritable path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Connectivity violates a precondition (non-manifold edge, wrong genus, bad cut).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Geometric precondition failed (degenerate face, point off the torus, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Linear solver failed to reach the requested residual.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdem

#pragma once

#include <stdexcept>
#include <string>

namespace mtreg {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric argument is outside its admissible range (sigma <= 0, alpha
// outside (0,1), empty sample, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

// An object could not be assembled: mismatched state spaces, bad coordinate
// index, an image observable with neither a closed form nor a sampling flag.
class ConstructionError : public Error {
public:
  using Error::Error;
};

// The design matrix has (numerically) dependent columns. `column` is the
// first offending column of the augmented matrix (0 = intercept).
class SingularDesignError : public Error {
public:
  SingularDesignError(const std::string& msg, int column)
      : Error(msg), column_(column) {}
  int column() const { return column_; }

private:
  int column_;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// compose_path was asked for a pair that is not ancestor/descendant.
class PathError : public Error {
public:
  using Error::Error;
};

// A causal system is malformed (cyclic parent map, node unreachable from the
// root, inconsistent edge spaces).
class StructureError : public Error {
public:
  using Error::Error;
};

class UnsupportedSamplingError : public Error {
public:
  using Error::Error;
};

// The likelihood is identically zero over every optimizer start.
class NoMaximizerError : public Error {
public:
  using Error::Error;
};

}  // namespace mtreg

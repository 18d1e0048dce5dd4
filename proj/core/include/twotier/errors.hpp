#pragma once

#include <stdexcept>
#include <string>

namespace twotier {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes;
// argument-level usage errors never reach this hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// operand shapes do not compose
class DimensionError : public Error {
 public:
  using Error::Error;
};

// operand violates a declared invariant (non-Hermitian, not orthonormal, ...)
class ValidationError : public Error {
 public:
  using Error::Error;
};

// numerically rank-deficient input where full rank is required
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, int column) : Error(what), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

// config file missing, unparsable, or inconsistent
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace twotier

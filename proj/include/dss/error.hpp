#pragma once

#include <stdexcept>
#include <string>

namespace dss {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hyperparameter or argument outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent dimensions or non-finite inputs.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (sizes, option combinations).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite objective, degenerate denominator, failed solve.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dss

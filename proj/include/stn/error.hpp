#pragma once

#include <stdexcept>
#include <string>

namespace stn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV or JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value outside the domain of an operation (e.g. logit of 1.0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Matrices, masks or name lists whose sizes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stn

#pragma once

#include <stdexcept>
#include <string>

namespace qlustering {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class MaskViolation : public Error {
 public:
  using Error::Error;
};

/// The generator has more than one trace-one fixed point (a dark mode exists).
class NonUniqueSteadyState : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Total output current is below the configured floor.
class DeadNetwork : public Error {
 public:
  using Error::Error;
};

class InitFailure : public Error {
 public:
  using Error::Error;
};

class TooManyPairs : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlustering

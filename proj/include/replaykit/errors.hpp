#pragma once

#include <stdexcept>
#include <string>

namespace replaykit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or strategy/env/agent combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Sampling requested before enough data exists.
class NotReadyError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

/// NaN/inf encountered, or a divergence guard tripped.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Internal bookkeeping is inconsistent (broken episode chain, stale cache).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Hindsight goals requested from an environment without a goal space.
class UnsupportedGoalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace replaykit

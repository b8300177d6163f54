#pragma once

#include <stdexcept>
#include <string>

namespace msviper {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or unknown option value (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input file missing or unparsable (CLI exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

/// State or layout does not conform to the expected shape.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class LayoutError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Start or goal cannot be placed in the generated map.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// step() called on an environment that is not running.
class LifecycleError : public Error {
 public:
  using Error::Error;
};

class EncoderError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// A formula was evaluated outside its domain (CLI exit code 3).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

}  // namespace msviper

#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A schedule quantity is undefined at the requested time (alpha_t = 0 or sigma_t = 0).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Both Hill statistics vanished, so the tail-index difference is inf - inf.
class DegenerateTailError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or dataset file could not be read back.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace collapse

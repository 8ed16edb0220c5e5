/// @file error.hpp
/// @brief Exception hierarchy shared by every wnlab module.
#pragma once

#include <stdexcept>
#include <string>

namespace wnlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violation on an argument or spec.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Every importance weight in a batch was zero.
class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

/// The integrator produced a non-finite value.
class IntegrationAborted : public Error {
 public:
  IntegrationAborted(double time, const std::string& what)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed configuration; `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace wnlab

#pragma once

#include <stdexcept>
#include <string>

namespace formpc {

/// Invalid model, controller or scenario configuration. `key()` names the
/// offending matrix or scenario key so messages can point at it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::string message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)),
        message_(std::move(message)) {}

  const std::string& key() const noexcept { return key_; }
  /// The message without the key prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string key_;
  std::string message_;
};

/// Raised by the QP solver for problems it refuses to solve (e.g. a Hessian
/// that is not positive definite).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace formpc

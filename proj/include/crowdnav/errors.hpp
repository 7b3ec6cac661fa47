#pragma once

#include <stdexcept>
#include <string>

namespace crowdnav {

/// Bad caller-supplied value (non-finite action, dt <= 0, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on call order or shapes was broken.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ScenarioGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config schema problem. `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a forward pass produces NaN/Inf; names the first bad tensor.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(std::string tensor)
      : std::runtime_error("non-finite values in " + tensor),
        tensor_(std::move(tensor)) {}
  const std::string& tensor() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

}  // namespace crowdnav

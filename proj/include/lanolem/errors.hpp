#pragma once

#include <stdexcept>
#include <string>

namespace lanolem {

/// Raised when a recursion produces a singular or non-finite quantity.
/// `step` is the time index (or iteration) at which the failure happened, -1 if not applicable.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, long step, const std::string& what)
      : std::runtime_error(stage + (step >= 0 ? " (step " + std::to_string(step) + ")" : "") + ": " + what),
        stage_(std::move(stage)),
        step_(step) {}

  const std::string& stage() const noexcept { return stage_; }
  long step() const noexcept { return step_; }

 private:
  std::string stage_;
  long step_;
};

/// Bad shapes, out-of-range hyperparameters, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lanolem

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dforge {

/// Invalid argument to a library operation (bad order, bad δ, empty ladder, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested derivative order beyond the regularity budget (n > 11).
class RegularityError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Vanishing dispersion coefficient where a nonzero one is required.
class DegeneracyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Missing partial derivatives, malformed config files, unknown presets.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Harness-level failure (no rung made progress).
class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced while evaluating f on the grid.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::size_t node)
      : std::runtime_error(what + " at node " + std::to_string(node)), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

}  // namespace dforge

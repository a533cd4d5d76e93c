#pragma once

#include <stdexcept>
#include <string>

namespace grazing {

/// Input outside the domain of an operation (r <= 0, s >= 2 for the transform, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An adaptive routine hit its work limit. Carries the best value it had.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double best_value, double best_error)
      : std::runtime_error(what), value(best_value), error(best_error) {}

  double value;
  double error;
};

/// Schema or value violation in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grazing

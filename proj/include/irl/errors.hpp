#pragma once

#include <stdexcept>
#include <string>

namespace irl {

// Invalid argument values: joint-limit violations, zero-width ranges, ...
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation called in a state where it is not allowed (e.g. stepping a
// finished episode).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or inconsistent configuration, task, chain or data files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during learning (non-finite TD error, gradient, ...).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace irl

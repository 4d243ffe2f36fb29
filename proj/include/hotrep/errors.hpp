#pragma once

#include <stdexcept>
#include <string>

namespace hotrep {

/// Input outside the domain of a formula or a malformed parameter set.
/// Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters are well formed but describe an unusable configuration
/// (zero efficiency, dark counts dominating). Maps to CLI exit code 2.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure inside the ODE integrator.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hotrep

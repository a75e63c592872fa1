#pragma once

#include <stdexcept>
#include <string>

namespace sybil {

/// Argument outside the operation's domain (negative cost, n < 2, inactive identity ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The search or experiment cannot be configured as requested.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The game does not support the requested operation (e.g. merging in a non-monoid game).
class UnsupportedOperation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Root finding or fixed-point iteration did not converge / no bracket found.
class NumericFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A self-check performed during an experiment failed.
class InvariantViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Too few Monte Carlo runs for the requested statistic.
class StatisticalPowerError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace sybil

#pragma once

#include <stdexcept>
#include <string>

namespace s2gpt {

/// Parameter or coordinate outside the admissible box.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// NaN/Inf encountered in an input or produced by an evaluation.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Snapshot (or residual) is numerically contained in the current span.
class DegenerateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Every candidate of the training set has already been chosen.
class ExhaustionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant (duplicate sparse points, shape mismatch, ...).
class ConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class StoreError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_consistency(const std::string& what);

}  // namespace s2gpt

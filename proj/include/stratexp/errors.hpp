#pragma once

#include <stdexcept>
#include <string>

namespace stratexp {

// Step size too large for the multiplicative update to keep weights positive.
class StepSizeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Horizon too short for a theory-driven default step size.
class HorizonError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exhaustive enumeration over C(K, m) subsets refused.
class CombinatorialBlowup : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Malformed or missing input data (maps to CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent experiment configuration (maps to CLI exit code 4).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace stratexp

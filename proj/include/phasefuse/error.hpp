#pragma once

#include <stdexcept>
#include <string>

namespace phasefuse {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment or scenario configuration (bad intervals, empty sweeps).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition (dimension mismatch, wrong N).
class UsageError : public Error {
 public:
  using Error::Error;
};

// The instance carries no information about theta (e.g. all-zero channel).
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

// A factorization failed where the math says it cannot; indicates a bug or
// corrupted input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace phasefuse

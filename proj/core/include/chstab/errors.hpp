#pragma once

#include <stdexcept>
#include <string>

namespace chstab {

// Base for every error the library raises. The category decides the CLI exit
// code, so each subclass stays a distinct type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept { return "error"; }
};

// Invalid sizes, ranges, or malformed input.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

// (H0), (H1) or trace nonvanishing failed and no override was given.
class AssumptionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "assumption"; }
};

// Singular or ill-conditioned lifting / coupler assembly.
class SynthesisError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "synthesis"; }
};

// Time integration left the stability budget.
class DivergenceError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "divergence"; }
};

}  // namespace chstab

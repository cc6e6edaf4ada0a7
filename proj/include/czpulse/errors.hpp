#pragma once

#include <stdexcept>
#include <string>

namespace czpulse {

// Base for every library error. `exit_code` follows the CLI convention:
// 2 = usage/config problem, 3 = numerical or calibration failure.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }
  virtual const char* kind() const noexcept { return "error"; }

 private:
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
  const char* kind() const noexcept override { return "config"; }
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what, 2) {}
  const char* kind() const noexcept override { return "domain"; }
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 3) {}
  const char* kind() const noexcept override { return "numerical"; }
};

// Raised when adiabatic continuation cannot be established.
class TrackingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "tracking"; }
};

class CalibrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "calibration"; }
};

}  // namespace czpulse

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symchaos {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or invalid parameters supplied by the user.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Numerical failure: blow-up, divergence, singular systems.
class NumericError : public Error {
public:
  using Error::Error;
};

class BlowUpError : public NumericError {
public:
  BlowUpError(const std::string& what, double time)
      : NumericError(what), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

class DivergenceError : public NumericError {
public:
  DivergenceError(const std::string& what, std::size_t step)
      : NumericError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

// Precondition violated by the data (too short, too few events, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace symchaos

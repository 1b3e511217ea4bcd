#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace backpar {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A configuration file or command line could not be accepted.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key.empty() ? what : "config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// An exponential factor left the representable range.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, double log_magnitude)
      : Error(what), log_magnitude_(log_magnitude) {}
  double log_magnitude() const { return log_magnitude_; }

 private:
  double log_magnitude_;
};

// An iteration or time integration failed to stay bounded or to converge.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step, double measure)
      : Error(what), step_(step), measure_(measure) {}
  std::size_t step() const { return step_; }
  double measure() const { return measure_; }

 private:
  std::size_t step_;
  double measure_;
};

class LinearSolveError : public Error {
 public:
  LinearSolveError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace backpar

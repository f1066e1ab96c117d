#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neuroperf {

// Malformed text input. Carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally well-formed input that violates a model or mesh invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration key is missing, unknown, or out of range. `key()` is the dotted key path.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string key, const std::string& what)
      : ValidationError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A computation was asked of an object whose state does not permit it
// (e.g. a non-positive healthy perfusion rate).
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular factorization, solver breakdown, non-finite fields.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(std::size_t pivot, const std::string& what)
      : NumericalError(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(std::size_t iterations, double residual, const std::string& what)
      : NumericalError(what + " after " + std::to_string(iterations) +
                       " iterations, relative residual " + std::to_string(residual)),
        iterations_(iterations),
        residual_(residual) {}
  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

}  // namespace neuroperf

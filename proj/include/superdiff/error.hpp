#pragma once

#include <stdexcept>
#include <string>

namespace superdiff {

enum class ErrorKind { Config, Domain, Numeric, Instability, Io };

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid configuration or argument outside an operation's contract.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Argument outside the mathematical domain of a function.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Quadrature or fit that did not reach its tolerance.
struct NumericError : Error {
  NumericError(const std::string& what, double estimate = 0.0, double error = 0.0)
      : Error(ErrorKind::Numeric, what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// Integrator step exceeded the stability guard.
struct InstabilityError : Error {
  explicit InstabilityError(const std::string& what) : Error(ErrorKind::Instability, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace superdiff

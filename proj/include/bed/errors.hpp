#pragma once

#include <stdexcept>
#include <string>

namespace bed {

/// Thrown when a function is evaluated outside its mathematical domain
/// (infeasible parameter, negative shape, etc.).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical routine failed. `operation()` names the failing step so the
/// CLI can report it.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string operation, const std::string& what)
      : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}

  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

/// Bad input data: unknown dataset, unreadable or malformed file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bed

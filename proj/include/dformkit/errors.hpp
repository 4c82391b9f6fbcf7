#pragma once

#include <stdexcept>
#include <string>

namespace dformkit {

/// Base of all library errors. The category decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { Validation, Numerical };

  Error(Category category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  Category category() const noexcept { return category_; }
  /// Short machine-readable identifier, e.g. "singular_solve".
  const std::string& code() const noexcept { return code_; }

 private:
  Category category_;
  std::string code_;
};

/// Malformed input: bad shapes, negative weights, duplicate edges, bad files.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string code = "validation")
      : Error(Category::Validation, std::move(code), message) {}
};

/// Well-formed input for which the requested quantity cannot be computed.
class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(Category::Numerical, std::move(code), message) {}
};

}  // namespace dformkit

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seiprd {

/// Machine-readable error categories. The CLI reports these verbatim and maps
/// each one to its own exit code.
enum class ErrorCategory {
  domain,
  numeric,
  diverged,
  alignment,
  validation,
  ordering,
  format,
  initialisation,
  degenerate,
  io,
  config,
};

std::string_view category_name(ErrorCategory category);

/// Process exit code for an error of this category; 0 and 1 are never used.
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_{category} {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

// Raised when a trajectory leaves the physically meaningful range.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(int day, const std::string& what)
      : Error(ErrorCategory::diverged, what), day_{day} {}

  int day() const noexcept { return day_; }

 private:
  int day_;
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what) : Error(ErrorCategory::alignment, what) {}
};

class ValidationError : public Error {
 public:
  ValidationError(std::size_t row, const std::string& what)
      : Error(ErrorCategory::validation, what), row_{row} {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class OrderingError : public Error {
 public:
  OrderingError(std::size_t row, const std::string& what)
      : Error(ErrorCategory::ordering, what), row_{row} {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t row, const std::string& what)
      : Error(ErrorCategory::format, what), row_{row} {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InitialisationError : public Error {
 public:
  explicit InitialisationError(const std::string& what)
      : Error(ErrorCategory::initialisation, what) {}
};

class DegenerateDistributionError : public Error {
 public:
  explicit DegenerateDistributionError(const std::string& what)
      : Error(ErrorCategory::degenerate, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

}  // namespace seiprd

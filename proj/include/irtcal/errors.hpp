#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irtcal {

// Precondition violated by an argument (bad dimensions, nonpositive
// discrimination, |r| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Pearson correlation requested on a zero-variance series.
class UndefinedCorrelation : public DomainError {
 public:
  using DomainError::DomainError;
};

// The data cannot support the requested operation, e.g. fewer than two
// persons remain after excluding extreme scores.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite likelihood during estimation.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, std::size_t person, std::size_t item)
      : std::runtime_error(what), person_(person), item_(item) {}

  std::size_t person() const noexcept { return person_; }
  std::size_t item() const noexcept { return item_; }

 private:
  std::size_t person_;
  std::size_t item_;
};

// Malformed input file. Line and column are 1-based; column 0 means the
// whole line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace irtcal

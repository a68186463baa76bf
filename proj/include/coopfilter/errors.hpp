#pragma once

#include <stdexcept>
#include <string>

namespace coopfilter {

/// Bad input: malformed config, dimension mismatch, precondition violation.
/// Mapped to CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: factorization breakdown, non-convergence, exhausted data.
/// Mapped to CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A property the library promises to maintain does not hold.
/// Mapped to CLI exit code 3.
class InvariantError : public std::runtime_error {
 public:
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coopfilter

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace condgan {

// Base of every error the library throws.  The CLI maps the subclasses onto
// exit codes (configuration 2, data 3, everything else 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or rank disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid option, hyperparameter, or flag combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data violates an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An internal contract was broken (non-scalar loss, probability outside (0,1), ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced by an operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Missing or unreadable data files, unknown dataset names.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary input; carries the byte offset at which parsing failed.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace condgan

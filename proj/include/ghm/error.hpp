#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ghm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation outside the domain of an operation (log of a nonpositive value, x/0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied inconsistent arguments: dimension mismatch, bad degree, violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or had to abort.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace ghm

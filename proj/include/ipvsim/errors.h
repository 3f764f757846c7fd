#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ipvsim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain (e.g. theta > 1).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A data structure violates one of its invariants.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
  public:
    ParseError(const std::string &message, std::size_t line)
        : Error{"line " + std::to_string(line) + ": " + message}, line_{line} {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Inference is undefined for the supplied data (e.g. an arm with fewer than 2 units).
class InferenceError : public Error {
  public:
    using Error::Error;
};

/// Machine-readable file carries a schema version this build does not understand.
class SchemaVersionError : public Error {
  public:
    using Error::Error;
};

} // namespace ipvsim

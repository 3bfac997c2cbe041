#pragma once

#include <stdexcept>
#include <string>

namespace mlab {

// Base class for all errors raised by the library. Callers that do not care
// about the category can catch this one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Fewer observations than an operation needs (short series, short windows).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Arguments violate a documented precondition or invariant.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A requested ticker, key or file does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Text or a file could not be parsed; message carries position context.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input data contradicts itself (duplicate rows, misaligned schemas).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Run configuration is unusable (missing required inputs, bad settings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A remote provider kept failing; message carries the attempt count.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_ = 0;
};

}  // namespace mlab

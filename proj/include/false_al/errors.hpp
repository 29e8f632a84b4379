#pragma once

#include <stdexcept>
#include <string>

namespace false_al {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or violated call precondition. The message
// names the offending field or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Mismatched dimensions between views that must stay aligned.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// API misuse: wrong ledger mode, duplicate ids, duplicate table cells.
class StateError : public Error {
 public:
  using Error::Error;
};

// Training loss became non-finite. Carries the offending epoch (1-based).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace false_al

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace logflat {

// Base of every error the library throws. The CLI maps subclasses onto
// exit codes (config -> 1, input -> 2, everything else -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input. Carries the 1-based line number when known.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// Well-formed JSON whose top level is not an object.
class StructureError : public InputError {
 public:
  using InputError::InputError;
};

class ProcessingError : public Error {
 public:
  using Error::Error;
};

// Incompatible value shapes at one field path (object here, text there).
class ClassificationConflict : public ProcessingError {
 public:
  ClassificationConflict(const std::string& path, const std::string& detail)
      : ProcessingError("classification conflict at '" + path + "': " + detail),
        path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class FlattenError : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

// Operation applied to a column of the wrong kind.
class KindError : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

}  // namespace logflat

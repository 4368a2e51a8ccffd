#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace minerva {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A malformed record in a newline-delimited input file. `line` is 1-based.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& what)
      : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Invalid configuration or inconsistent inputs detected before any compute.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace minerva

#pragma once

#include <stdexcept>
#include <string>

namespace graphqa {

// Thrown when tensor shapes do not line up; the message names both shapes.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated value-level preconditions (empty input, NaN, out-of-range label, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unknown identifier (parameter name, relation id, ...).
struct LookupError : std::runtime_error {
  explicit LookupError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent generator or training configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable serialized payload; carries the 1-based line number.
struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
  std::size_t line_number;
};

// Version or schema mismatch in a file that parsed as JSON.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace graphqa

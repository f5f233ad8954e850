#pragma once

#include <stdexcept>
#include <string>

namespace motorfep {

/// Invalid hyperparameter or configuration entry.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Vector/matrix dimensions that do not line up.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input; carries the 1-based line number.
struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A quantity that must be finite was not.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace motorfep

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace normprobe {

// Invalid configuration or plan. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A DataError tied to a line of an input file (1-based).
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::string detail, const std::string& source = {})
      : DataError((source.empty() ? std::string() : source + ": ") + "line " +
                  std::to_string(line) + ": " + detail),
        line_(line),
        detail_(std::move(detail)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// Failure during computation (divergence, exhausted resampling, ...).
// Maps to CLI exit code 3.
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace normprobe

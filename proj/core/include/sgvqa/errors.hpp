#pragma once

#include <stdexcept>
#include <string>

namespace sgvqa {

/// A value violates a domain invariant (bad fixture, dangling id, schema error).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an operation argument does not hold (k = 0, z <= 0, ...).
class InvalidArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model output could not be resolved into the expected structure.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the VLM gateway. Transport failures are retryable; protocol and
/// configuration failures are not.
class GatewayError : public std::runtime_error {
 public:
  enum class Kind { transport, protocol, http_status, config };

  GatewayError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return kind_ == Kind::transport; }

 private:
  Kind kind_;
};

/// Row-level failure while loading a dataset or JSONL file. `line()` is 1-based.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sgvqa

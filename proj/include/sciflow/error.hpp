#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sciflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `location()` is either `line:col` for text
/// formats or a JSON pointer for schema-level problems.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message),
        location_(std::move(location)),
        message_(message) {}

  const std::string& location() const noexcept { return location_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string location_;
  std::string message_;
};

/// Text parse failure with a 1-based source position.
class SyntaxError : public ParseError {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : ParseError(std::to_string(line) + ":" + std::to_string(column), message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (e.g. a score outside [0,1]).
class ContractError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Verification edit that the identity-consistent protocol forbids.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ProvenanceError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  enum class Kind { timeout, transport, malformed_response, out_of_range, unavailable };

  ProviderError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(ProviderError::Kind kind) noexcept;

class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& message, std::string audit_text = {})
      : Error(stage + ": " + message), stage_(std::move(stage)), audit_text_(std::move(audit_text)) {}

  const std::string& stage() const noexcept { return stage_; }
  /// Offending intermediate text (e.g. the Mermaid source) kept for audit.
  const std::string& audit_text() const noexcept { return audit_text_; }

 private:
  std::string stage_;
  std::string audit_text_;
};

}  // namespace sciflow

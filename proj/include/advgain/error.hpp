#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advgain {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Parse,
  Validation,
  Io,
  InsufficientData,
  DimensionMismatch,
  EmptyEncoding,
  MissingEmbedding,
  ZeroVector,
  InvalidDistribution,
  EmptyInput,
  KTooLarge,
  MissingTarget,
  InvalidConfidence,
  Config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyEncoding: return "EmptyEncoding";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::MissingTarget: return "MissingTarget";
    case ErrorKind::InvalidConfidence: return "InvalidConfidence";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// Parse failure with the 1-based line it happened on (0 when not line-oriented).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, const std::string& source = {})
      : Error(ErrorKind::Parse, compose(message, line, source)),
        message_(message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

  /// Same error, attributed to a file.
  ParseError with_source(const std::string& source) const {
    return ParseError(message_, line_, source);
  }

 private:
  static std::string compose(const std::string& message, std::size_t line,
                             const std::string& source) {
    std::string out = source.empty() ? std::string{} : source + ": ";
    if (line) out += "line " + std::to_string(line) + ": ";
    return out + message;
  }

  std::string message_;
  std::size_t line_;
};

/// Invariant violation attributable to a record (sample id, pair id, ...).
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::string offending_id = {})
      : Error(ErrorKind::Validation,
              offending_id.empty() ? message : message + " (id '" + offending_id + "')"),
        id_(std::move(offending_id)) {}

  const std::string& offending_id() const noexcept { return id_; }

 private:
  std::string id_;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got, std::size_t line = 0)
      : Error(ErrorKind::DimensionMismatch,
              (line ? "line " + std::to_string(line) + ": " : std::string{}) +
                  "expected dimension " + std::to_string(expected) + ", got " +
                  std::to_string(got)),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Metric or encoding failure raised while evaluating one pair.
class PairError : public Error {
 public:
  PairError(const std::string& pair_id, const Error& cause)
      : Error(cause.kind(), "pair '" + pair_id + "': " + cause.detail()),
        pair_id_(pair_id) {}

  const std::string& pair_id() const noexcept { return pair_id_; }

 private:
  std::string pair_id_;
};

}  // namespace advgain

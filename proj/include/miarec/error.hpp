#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace miarec {

/// Coarse failure category, mapped onto process exit codes by the CLI.
enum class ErrorKind { Config = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateKeyError : public Error {
 public:
  explicit DuplicateKeyError(const std::string& key)
      : Error(ErrorKind::Data, "duplicate key: " + key), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class CoverageError : public Error {
 public:
  explicit CoverageError(const std::string& missing_id)
      : Error(ErrorKind::Data, "no vector for paper " + missing_id), missing_id_(missing_id) {}
  const std::string& missing_id() const noexcept { return missing_id_; }

 private:
  std::string missing_id_;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InsufficientCandidatesError : public Error {
 public:
  explicit InsufficientCandidatesError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class EmptySplitError : public Error {
 public:
  explicit EmptySplitError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class InconsistencyError : public Error {
 public:
  explicit InconsistencyError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t epoch)
      : Error(ErrorKind::Numeric, "training diverged at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace miarec

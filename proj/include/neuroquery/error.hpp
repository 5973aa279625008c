#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neuroquery {

/// Base class of every error raised by the library.
///
/// `context()` accumulates location hints (clause index, file name) added by
/// callers while the exception propagates; `what()` stays the original message.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}

  void add_context(std::string note) { context_.push_back(std::move(note)); }
  const std::vector<std::string>& context() const noexcept { return context_; }

  /// Message with context notes, innermost first.
  std::string describe() const {
    std::string out = what();
    for (const auto& note : context_) out += " (" + note + ")";
    return out;
  }

 private:
  std::vector<std::string> context_;
};

// ---- knowledge base -------------------------------------------------------

class NonGroundFact : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---- query language -------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected,
             const std::string& found)
      : Error(format(line, column, expected, found)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string format(std::size_t line, std::size_t column,
                            const std::vector<std::string>& expected, const std::string& found) {
    std::string out = "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    if (!expected.empty()) {
      out += "expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i > 0) out += i + 1 == expected.size() ? " or " : ", ";
        out += expected[i];
      }
      out += ", ";
    }
    out += found;
    return out;
  }

  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
};

/// Literal kinds in a filter expression provably mismatch, e.g. `"a" + 1`.
class TypeErrorStatic : public ParseError {
 public:
  TypeErrorStatic(std::size_t line, std::size_t column, const std::string& message)
      : ParseError(line, column, {}, "type error: " + message) {}
};

// ---- evaluation -----------------------------------------------------------

class QueryError : public Error {
 public:
  using Error::Error;
};

class UnboundVariableInFilter : public QueryError {
 public:
  explicit UnboundVariableInFilter(std::string name)
      : QueryError("filter references unbound variable ?" + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class FilterTypeError : public QueryError {
 public:
  using QueryError::QueryError;
};

class RuleDepthExceeded : public QueryError {
 public:
  explicit RuleDepthExceeded(std::size_t limit)
      : QueryError("rule resolution exceeded max depth " + std::to_string(limit)) {}
};

class InvalidRule : public QueryError {
 public:
  using QueryError::QueryError;
};

class VariableAlreadyBound : public QueryError {
 public:
  explicit VariableAlreadyBound(const std::string& name)
      : QueryError("answer variable ?" + name + " is already bound") {}
};

// ---- retrieval ------------------------------------------------------------

class DuplicateDocKey : public Error {
 public:
  explicit DuplicateDocKey(const std::string& key) : Error("duplicate document key: " + key) {}
};

class UnknownDocKey : public Error {
 public:
  explicit UnknownDocKey(const std::string& key) : Error("unknown document key: " + key) {}
};

// ---- gateway --------------------------------------------------------------

class GatewayUnavailable : public Error {
 public:
  using Error::Error;
};

class GatewayProtocolError : public Error {
 public:
  using Error::Error;
};

class TranslationUnparsable : public Error {
 public:
  TranslationUnparsable(std::string raw, const std::string& reason)
      : Error("translated query does not parse: " + reason), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// ---- evaluation harness ---------------------------------------------------

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class MissingRun : public Error {
 public:
  explicit MissingRun(const std::string& qid) : Error("no retrieval run for question " + qid) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace neuroquery

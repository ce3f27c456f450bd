#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qjit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed query text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string &what, int line, int column)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class PlanError : public Error {
 public:
  enum class Kind { UnknownTable, UnknownColumn, LiteralOutOfRange, NoLoop };

  PlanError(Kind kind, const std::string &what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class StorageError : public Error {
 public:
  enum class Kind { Io, Format, Parse, Schema };

  StorageError(Kind kind, const std::string &what, std::int64_t row = -1, int column = -1)
      : Error(what), kind_(kind), row_(row), column_(column) {}

  Kind kind() const { return kind_; }
  /// 1-based CSV row for parse errors, -1 otherwise.
  std::int64_t row() const { return row_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  std::int64_t row_;
  int column_;
};

inline const char *status_name(std::int32_t code) {
  switch (code) {
    case 0: return "ok";
    case 1: return "type mismatch";
    case 2: return "bad register";
    case 3: return "bad cursor";
    case 4: return "no such table";
    case 5: return "misuse";
    default: return "unknown error";
  }
}

/// Failure while running a program; `code` is one of the QJ_* status codes.
class ExecutionError : public Error {
 public:
  ExecutionError(std::int32_t code, std::int32_t pc, const std::string &detail = {})
      : Error(std::string(status_name(code)) + " at pc " + std::to_string(pc) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        pc_(pc) {}

  std::int32_t code() const { return code_; }
  std::int32_t pc() const { return pc_; }

 private:
  std::int32_t code_;
  std::int32_t pc_;
};

class JitError : public Error {
 public:
  enum class Kind {
    ToolchainMissing,
    CompileFailed,
    LoadFailed,
    MissingTemplate,
    UnsupportedOpcode,
    NonTerminatingRegion,
    AlreadyInstalled,
    Io
  };

  JitError(Kind kind, const std::string &what, std::string diagnostics = {})
      : Error(what), kind_(kind), diagnostics_(std::move(diagnostics)) {}

  Kind kind() const { return kind_; }
  const std::string &diagnostics() const { return diagnostics_; }

 private:
  Kind kind_;
  std::string diagnostics_;
};

class ReportError : public Error {
 public:
  using Error::Error;
};

}  // namespace qjit

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qjit/opcode.hpp"
#include "qjit/vdbe.h"

namespace qjit {

/// One instruction. The C layout is shared with compiled regions.
using Op = ::qj_op;

Op make_op(Opcode opcode, std::int32_t p1 = 0, std::int32_t p2 = 0, std::int32_t p3 = 0);
inline Opcode opcode_of(const Op &op) { return static_cast<Opcode>(op.opcode); }

struct Program {
  std::vector<Op> ops;
  std::optional<std::int32_t> main_loop_head;
  std::string source_text;
  /// Register file size; registers are 0..register_count-1.
  std::int32_t register_count = 0;
  std::int32_t cursor_count = 0;

  std::size_t size() const { return ops.size(); }

  /// Clears hot counters and compiled entries.
  void reset_jit_state();

  /// FNV-1a over opcodes and operands; names emitted region files.
  std::uint64_t fingerprint() const;

  /// EXPLAIN-style listing, one instruction per line.
  std::string explain() const;
};

/// Program whose register and cursor counts are derived from the operands.
Program make_program(std::vector<Op> ops);

/// Register indices read or written by `op`.
std::vector<std::int32_t> registers_used(const Op &op);

struct Finding {
  enum class Kind {
    Empty,
    UnknownOpcode,
    JumpOutOfRange,
    RegisterOutOfRange,
    CursorOutOfRange,
    CursorBeforeOpen,
    FallsOffEnd,
    NoHalt
  };
  Kind kind;
  std::int32_t pc;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  std::string to_string() const;
};

/// Checks jump targets, register bounds against `register_file_size`
/// (the program's own register_count when omitted), cursor ids, and that no
/// cursor is used on a path where it may not be open yet.
ValidationReport validate_program(const Program &program, std::optional<std::int32_t> register_file_size = {});

/// Throws ExecutionError(QJ_MISUSE) carrying the report when invalid.
void require_valid(const Program &program);

}  // namespace qjit

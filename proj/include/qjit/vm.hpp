#pragma once

#include <cstdint>
#include <vector>

#include "qjit/program.hpp"
#include "qjit/storage.hpp"
#include "qjit/value.hpp"

namespace qjit {

enum class VmStatus { Running, Yielded, Halted, Errored };

/// Registers, cursors and pc for one execution of a program.
class VmState {
 public:
  VmState(const Program &program, const Database &db);

  VmState(const VmState &) = delete;
  VmState &operator=(const VmState &) = delete;

  qj_vm &raw() { return vm_; }
  const qj_vm &raw() const { return vm_; }

  std::int32_t pc() const { return vm_.pc; }
  void set_pc(std::int32_t pc) { vm_.pc = pc; }

  VmStatus status() const { return status_; }
  std::int32_t error_code() const { return error_code_; }
  void set_status(VmStatus s, std::int32_t code = QJ_OK) {
    status_ = s;
    error_code_ = code;
  }
  /// Continue after a Row yield.
  void resume();

  std::int32_t register_count() const { return static_cast<std::int32_t>(registers_.size()); }
  Value reg(std::int32_t i) const { return Value::from_cell(registers_.at(static_cast<std::size_t>(i))); }
  const qj_cursor &cursor(std::int32_t id) const { return cursors_.at(static_cast<std::size_t>(id)); }

 private:
  std::vector<qj_value> registers_;
  std::vector<qj_cursor> cursors_;
  qj_db db_;
  qj_vm vm_{};
  VmStatus status_ = VmStatus::Running;
  std::int32_t error_code_ = QJ_OK;
};

struct StepOutcome {
  enum class Kind { Continue, Row, Halted, Error };
  Kind kind = Kind::Continue;
  std::int32_t first_reg = 0;
  std::int32_t reg_count = 0;
  std::int32_t resume_pc = 0;
  std::int32_t code = QJ_OK;
};

/// Executes the single instruction at state.pc(). Operands are bounds-checked
/// first, so unvalidated programs report BadRegister/BadCursor instead of
/// touching memory outside the register file.
StepOutcome step(VmState &state, const Database &db, const Program &program);

}  // namespace qjit

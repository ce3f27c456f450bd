#include "qjit/vm.hpp"

#include "interp/semantic_locals.h"
#include "interp/semantics_hash.h"
#include "qjit/error.hpp"

namespace qjit {

VmState::VmState(const Program &program, const Database &db)
    : registers_(static_cast<std::size_t>(std::max(program.register_count, 1))),
      cursors_(static_cast<std::size_t>(std::max(program.cursor_count, 1))),
      db_(db.view()) {
  vm_.aOp = program.ops.data();
  vm_.nOp = static_cast<std::int32_t>(program.ops.size());
  vm_.aMem = registers_.data();
  vm_.nMem = static_cast<std::int32_t>(registers_.size());
  vm_.aCsr = cursors_.data();
  vm_.nCsr = static_cast<std::int32_t>(cursors_.size());
  vm_.db = &db_;
  vm_.pc = 0;
}

void VmState::resume() {
  if (status_ == VmStatus::Yielded) status_ = VmStatus::Running;
}

namespace {

// Operand check done before executing one instruction in step().
std::int32_t check_operands(const qj_vm &vm, const Op &op) {
  auto code = opcode_from_code(op.opcode);
  if (!code) return QJ_MISUSE;
  if (uses_p2_as_jump(*code) && (op.p2 < 0 || op.p2 >= vm.nOp)) return QJ_MISUSE;
  for (std::int32_t r : registers_used(op)) {
    if (r < 0 || r >= vm.nMem) return QJ_BAD_REGISTER;
  }
  switch (*code) {
    case Opcode::OpenRead:
    case Opcode::Rewind:
    case Opcode::Column:
    case Opcode::Next:
      if (op.p1 < 0 || op.p1 >= vm.nCsr) return QJ_BAD_CURSOR;
      if (*code != Opcode::OpenRead && !vm.aCsr[op.p1].is_open) return QJ_BAD_CURSOR;
      if (*code == Opcode::Column && op.p2 < 0) return QJ_TYPE_MISMATCH;
      break;
    default:
      break;
  }
  return QJ_OK;
}

}  // namespace

StepOutcome step(VmState &state, const Database &, const Program &program) {
  StepOutcome outcome;
  if (state.status() != VmStatus::Running) {
    outcome.kind = StepOutcome::Kind::Error;
    outcome.code = QJ_MISUSE;
    return outcome;
  }
  qj_vm *vm = &state.raw();
  std::int32_t pc = vm->pc;
  if (pc < 0 || pc >= static_cast<std::int32_t>(program.ops.size())) {
    outcome.kind = StepOutcome::Kind::Error;
    outcome.code = QJ_MISUSE;
    state.set_status(VmStatus::Errored, QJ_MISUSE);
    return outcome;
  }
  const qj_op *aOp = vm->aOp;
  qj_value *aMem = vm->aMem;
  const qj_op *pOp = &aOp[pc];
  std::int32_t rc = check_operands(*vm, *pOp);
  QJ_SEMANTIC_LOCALS
  if (rc != QJ_OK) goto abort_due_to_error;

  switch (pOp->opcode) {
#include "interp/switch_cases.inc"
    default:
      rc = QJ_MISUSE;
      goto abort_due_to_error;
  }
  vm->pc = pc + 1;
  return outcome;

jump_to_p2:
  vm->pc = pOp->p2;
  return outcome;

row_exit:
  vm->pc = pc + 1;
  outcome.kind = StepOutcome::Kind::Row;
  outcome.first_reg = vm->row_first;
  outcome.reg_count = vm->row_count;
  outcome.resume_pc = pc + 1;
  state.set_status(VmStatus::Yielded);
  return outcome;

halt_exit:
  outcome.kind = StepOutcome::Kind::Halted;
  state.set_status(VmStatus::Halted);
  return outcome;

abort_due_to_error:
  outcome.kind = StepOutcome::Kind::Error;
  outcome.code = rc;
  state.set_status(VmStatus::Errored, rc);
  return outcome;
}

static_assert(QJ_SEMANTICS_HASH_SWITCH == QJ_SEMANTICS_SOURCE_HASH, "switch cases out of date");

}  // namespace qjit

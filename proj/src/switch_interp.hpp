#pragma once
// Switch interpreter loop shared by run_switch and run_jit. Only included by
// those two translation units.

#include "interp/semantic_locals.h"
#include "interp/semantics_hash.h"
#include "qjit/backends.hpp"
#include "qjit/error.hpp"
#include "qjit/vm.hpp"

namespace qjit::detail {

struct NoJitHooks {
  static constexpr bool kJit = false;
  void backward_jump(std::int32_t, std::int32_t) {}
  qj_outcome enter(std::int32_t, qj_vm &) { return {}; }
};

template <bool kCount, class Hooks>
void interpret_switch(VmState &state, const RowSink &sink, RunStats &stats, Hooks &hooks) {
  qj_vm *vm = &state.raw();
  const qj_op *aOp = vm->aOp;
  qj_value *aMem = vm->aMem;
  const qj_op *pOp = aOp;
  std::int32_t rc = QJ_OK;
  std::int32_t pc = vm->pc;
  std::uint64_t retired = 0;
  std::uint64_t rows = 0;
  [[maybe_unused]] bool skip_entry = false;
  QJ_SEMANTIC_LOCALS

  for (;;) {
    pOp = &aOp[pc];
    if constexpr (Hooks::kJit) {
      if (pOp->compiled_entry != nullptr && !skip_entry) {
        vm->pc = pc;
        qj_outcome out = hooks.enter(pc, *vm);
        pc = out.pc;
        switch (out.kind) {
          case QJ_OUT_ROW: goto deliver_row;
          case QJ_OUT_EXIT: continue;
          case QJ_OUT_DEOPT: skip_entry = true; continue;
          case QJ_OUT_HALT: goto halt_exit;
          default: rc = out.code; goto abort_due_to_error;
        }
      }
      skip_entry = false;
    }
    if constexpr (kCount) ++retired;
    switch (pOp->opcode) {
#include "interp/switch_cases.inc"
      default:
        rc = QJ_MISUSE;
        goto abort_due_to_error;
    }
    ++pc;
    continue;

  jump_to_p2:
    if constexpr (Hooks::kJit) {
      if (pOp->p2 < pc) hooks.backward_jump(pc, pOp->p2);
    }
    pc = pOp->p2;
    continue;

  row_exit:
    ++pc;
  deliver_row:
    ++rows;
    vm->pc = pc;
    if (sink(RowView(aMem + vm->row_first, static_cast<std::size_t>(vm->row_count))) == SinkAction::Abort) {
      stats.aborted = true;
      state.set_status(VmStatus::Halted);
      break;
    }
    continue;

  halt_exit:
    state.set_status(VmStatus::Halted);
    break;

  abort_due_to_error:
    stats.rows_emitted += rows;
    stats.instructions_retired += retired;
    state.set_status(VmStatus::Errored, rc);
    vm->pc = pc;
    throw ExecutionError(rc, pc);
  }
  vm->pc = pc;
  stats.rows_emitted += rows;
  stats.instructions_retired += retired;
}

static_assert(QJ_SEMANTICS_HASH_SWITCH == QJ_SEMANTICS_SOURCE_HASH, "switch cases out of date");

}  // namespace qjit::detail

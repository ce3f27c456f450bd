#include <vector>

#include "clock.hpp"
#include "interp/semantic_locals.h"
#include "interp/semantics_hash.h"
#include "interp/threaded_table.h"
#include "qjit/backends.hpp"
#include "qjit/error.hpp"
#include "qjit/vm.hpp"

namespace qjit {
namespace {

// Direct threading: every instruction is resolved to its handler address
// once, and each handler jumps straight to the next instruction's handler.
template <bool kCount>
void interpret_threaded(VmState &state, const RowSink &sink, RunStats &stats) {
  static void *const kHandlers[] = QJ_THREADED_DISPATCH_TABLE;
  static_assert(sizeof(kHandlers) / sizeof(kHandlers[0]) == QJ_OPCODE_COUNT);

  qj_vm *vm = &state.raw();
  const qj_op *aOp = vm->aOp;
  qj_value *aMem = vm->aMem;
  const qj_op *pOp = aOp;
  std::int32_t rc = QJ_OK;
  std::int32_t pc = vm->pc;
  std::uint64_t retired = 0;
  std::uint64_t rows = 0;
  QJ_SEMANTIC_LOCALS

  std::vector<void *> targets(static_cast<std::size_t>(vm->nOp));
  for (std::int32_t i = 0; i < vm->nOp; ++i) targets[static_cast<std::size_t>(i)] = kHandlers[aOp[i].opcode];
  void *const *target = targets.data();

#define QJ_DISPATCH()              \
  do {                             \
    pOp = &aOp[pc];                \
    if constexpr (kCount) ++retired; \
    goto *target[pc];              \
  } while (0)
#define QJ_NEXT() \
  do {            \
    ++pc;         \
    QJ_DISPATCH(); \
  } while (0)
#define QJ_JUMP_P2()   \
  do {                 \
    pc = pOp->p2;      \
    QJ_DISPATCH();     \
  } while (0)

  QJ_DISPATCH();

#include "interp/threaded_handlers.inc"

row_exit:
  ++pc;
  ++rows;
  vm->pc = pc;
  if (sink(RowView(aMem + vm->row_first, static_cast<std::size_t>(vm->row_count))) == SinkAction::Abort) {
    stats.aborted = true;
    state.set_status(VmStatus::Halted);
    goto done;
  }
  QJ_DISPATCH();

halt_exit:
  state.set_status(VmStatus::Halted);
  goto done;

abort_due_to_error:
  stats.rows_emitted += rows;
  stats.instructions_retired += retired;
  state.set_status(VmStatus::Errored, rc);
  vm->pc = pc;
  throw ExecutionError(rc, pc);

done:
  vm->pc = pc;
  stats.rows_emitted += rows;
  stats.instructions_retired += retired;

#undef QJ_DISPATCH
#undef QJ_NEXT
#undef QJ_JUMP_P2
}

static_assert(QJ_SEMANTICS_HASH_THREADED == QJ_SEMANTICS_SOURCE_HASH, "threaded handlers out of date");

}  // namespace

RunStats run_threaded(const Program &program, const Database &db, const RowSink &sink, RunOptions options) {
  require_valid(program);
  RunStats stats;
  detail::Stopwatch clock;
  VmState state(program, db);
  if (options.count_instructions) {
    interpret_threaded<true>(state, sink, stats);
  } else {
    interpret_threaded<false>(state, sink, stats);
  }
  stats.cpu_ns = clock.cpu();
  stats.wall_ns = clock.wall();
  return stats;
}

}  // namespace qjit

/* Minimal semantics: every opcode but Ge shares one no-op block. */
#include "qjit/vdbe.h"

QJ_NOINLINE int qj_exec(qj_vm *vm) {
  qj_value *pIn1;
  qj_value *pIn3;

  switch (pOp->opcode) {
    case OP_Init:
    case OP_Transaction:
    case OP_Integer:
    case OP_OpenRead:
    case OP_Rewind:
    case OP_Column:
    case OP_Copy:
    case OP_ResultRow:
    case OP_Next:
    case OP_Goto:
    case OP_Halt:
    case OP_Eq:
    case OP_Ne:
    case OP_Lt:
    case OP_Le:
    case OP_Gt: {
      break;
    }

    case OP_Ge: {
      pIn3 = &aMem[pOp->p3];
      pIn1 = &aMem[pOp->p1];
      if (pIn3->type != QJ_INT) {
        rc = QJ_TYPE_MISMATCH;
        goto abort_due_to_error;
      }
      if (pIn3->u.i >= pIn1->u.i) {
        goto jump_to_p2;
      }
      break;
    }
  }
}

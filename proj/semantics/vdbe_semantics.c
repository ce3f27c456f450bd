/*
 * Opcode semantics for the query VM.
 *
 * This file is the only place opcode behaviour is written down. It is never
 * compiled directly: qjit-templates parses it at build time and generates the
 * switch interpreter's cases, the threaded interpreter's handlers and the JIT
 * opcode templates from it.
 *
 * Allowed subset:
 *   - one function whose body is local declarations followed by exactly one
 *     `switch (pOp->opcode)`; no other switch anywhere
 *   - case blocks contain no declarations, loops, or returns
 *   - jumps go to `jump_to_p2`, `abort_due_to_error` (set rc first),
 *     `halt_exit`, `row_exit`, or a label local to the same case block
 *   - a non-empty case block ends in `break` or a jump; only empty case
 *     labels fall through
 *
 * Names bound by the environment: vm, aOp, aMem, pOp, rc.
 */
#include "qjit/vdbe.h"

QJ_NOINLINE int qj_exec(qj_vm *vm) {
  qj_value *pIn1;
  qj_value *pIn3;
  qj_value *pOut;
  qj_cursor *pC;
  int res;
  int res2;

  switch (pOp->opcode) {
    case OP_Init: {
      goto jump_to_p2;
    }

    /* Transactions are not modelled. */
    case OP_Transaction: {
      break;
    }

    case OP_Integer: {
      pOut = &aMem[pOp->p2];
      pOut->type = QJ_INT;
      pOut->n = 0;
      pOut->u.i = pOp->p1;
      break;
    }

    case OP_OpenRead: {
      if (pOp->p2 >= vm->db->ntable) {
        rc = QJ_NO_SUCH_TABLE;
        goto abort_due_to_error;
      }
      pC = &vm->aCsr[pOp->p1];
      pC->tab = &vm->db->tables[pOp->p2];
      pC->row = 0;
      pC->at_end = 1;
      pC->is_open = 1;
      break;
    }

    case OP_Rewind: {
      pC = &vm->aCsr[pOp->p1];
      pC->row = 0;
      if (pC->tab->nrow == 0) {
        pC->at_end = 1;
        goto jump_to_p2;
      }
      pC->at_end = 0;
      break;
    }

    case OP_Column: {
      pC = &vm->aCsr[pOp->p1];
      if (pOp->p2 >= pC->tab->ncol) {
        rc = QJ_TYPE_MISMATCH;
        goto abort_due_to_error;
      }
      if (pC->at_end) {
        aMem[pOp->p3].type = QJ_NULL;
        goto column_done;
      }
      aMem[pOp->p3] = pC->tab->cells[pC->row * pC->tab->ncol + pOp->p2];
    column_done:
      break;
    }

    case OP_Copy: {
      aMem[pOp->p2] = aMem[pOp->p1];
      break;
    }

    case OP_ResultRow: {
      vm->row_first = pOp->p1;
      vm->row_count = pOp->p2;
      goto row_exit;
    }

    case OP_Next: {
      pC = &vm->aCsr[pOp->p1];
      if (pC->at_end) {
        break;
      }
      pC->row++;
      if (pC->row < pC->tab->nrow) {
        goto jump_to_p2;
      }
      pC->at_end = 1;
      break;
    }

    case OP_Goto: {
      goto jump_to_p2;
    }

    case OP_Halt: {
      goto halt_exit;
    }

    /* Jump to p2 when reg[p3] OP reg[p1]. */
    case OP_Eq:
    case OP_Ne:
    case OP_Lt:
    case OP_Le:
    case OP_Gt:
    case OP_Ge: {
      pIn3 = &aMem[pOp->p3];
      pIn1 = &aMem[pOp->p1];
      res = qj_mem_compare(pIn3, pIn1);
      if (pOp->opcode == OP_Eq) {
        res2 = res == 0;
      } else if (pOp->opcode == OP_Ne) {
        res2 = res != 0;
      } else if (pOp->opcode == OP_Lt) {
        res2 = res < 0;
      } else if (pOp->opcode == OP_Le) {
        res2 = res <= 0;
      } else if (pOp->opcode == OP_Gt) {
        res2 = res > 0;
      } else {
        res2 = res >= 0;
      }
      if (res2) {
        goto jump_to_p2;
      }
      break;
    }
  }
}

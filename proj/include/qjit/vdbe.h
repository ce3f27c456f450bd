/*
 * Runtime ABI shared by the interpreters, the opcode templates and the
 * compiled loop regions. Regions are emitted as C, so everything in this
 * header must stay valid C11 as well as C++20.
 */
#ifndef QJIT_VDBE_H
#define QJIT_VDBE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Dynamic value tags. */
enum { QJ_NULL = 0, QJ_INT = 1, QJ_REAL = 2, QJ_TEXT = 3 };

/*
 * One register or table cell. Text is never owned by a register: it points
 * into the immutable storage of the table it was read from.
 */
typedef struct qj_value {
  int32_t type;
  uint32_t n; /* text length in bytes */
  union {
    int64_t i;
    double r;
    const char *z;
  } u;
} qj_value;

/* X-macro over the instruction set, in numeric-code order. */
#define QJ_OPCODE_LIST(X) \
  X(Init)                 \
  X(Transaction)          \
  X(Integer)              \
  X(OpenRead)             \
  X(Rewind)               \
  X(Column)               \
  X(Copy)                 \
  X(ResultRow)            \
  X(Next)                 \
  X(Goto)                 \
  X(Halt)                 \
  X(Eq)                   \
  X(Ne)                   \
  X(Lt)                   \
  X(Le)                   \
  X(Gt)                   \
  X(Ge)

#define QJ_OPCODE_ENUM_(name) OP_##name,
enum { QJ_OPCODE_LIST(QJ_OPCODE_ENUM_) QJ_OPCODE_COUNT };
#undef QJ_OPCODE_ENUM_

/* Status codes carried by errors. */
enum {
  QJ_OK = 0,
  QJ_TYPE_MISMATCH = 1,
  QJ_BAD_REGISTER = 2,
  QJ_BAD_CURSOR = 3,
  QJ_NO_SUCH_TABLE = 4,
  QJ_MISUSE = 5
};

/* What a compiled region hands back to the interpreter. */
enum { QJ_OUT_ROW = 0, QJ_OUT_EXIT = 1, QJ_OUT_HALT = 2, QJ_OUT_ERROR = 3, QJ_OUT_DEOPT = 4 };

typedef struct qj_outcome {
  int32_t kind;
  int32_t pc;
  int32_t code;
} qj_outcome;

struct qj_vm;
typedef qj_outcome (*qj_region_fn)(struct qj_vm *);

typedef struct qj_op {
  int32_t opcode;
  int32_t p1;
  int32_t p2;
  int32_t p3;
  uint32_t hot_count;
  qj_region_fn compiled_entry;
} qj_op;

typedef struct qj_table_ref {
  const qj_value *cells; /* row-major, nrow * ncol */
  int64_t nrow;
  int32_t ncol;
} qj_table_ref;

typedef struct qj_db {
  const qj_table_ref *tables;
  int32_t ntable;
} qj_db;

typedef struct qj_cursor {
  const qj_table_ref *tab;
  int64_t row;
  int32_t at_end;
  int32_t is_open;
} qj_cursor;

typedef struct qj_vm {
  const qj_op *aOp;
  int32_t nOp;
  qj_value *aMem;
  int32_t nMem;
  qj_cursor *aCsr;
  int32_t nCsr;
  const qj_db *db;
  int32_t pc;
  int32_t row_first;
  int32_t row_count;
} qj_vm;

/*
 * Total order over values: NULL < numerics < text. Int and Real compare by
 * exact numeric value, text by bytes. Exported from the runtime library so
 * compiled regions resolve it at load time.
 */
int qj_mem_compare(const qj_value *a, const qj_value *b);

/* Three-way compare of two values already known to be integers. */
static inline int qj_int_compare(const qj_value *a, const qj_value *b) {
  return (a->u.i > b->u.i) - (a->u.i < b->u.i);
}

static inline qj_outcome qj_outcome_make(int32_t kind, int32_t pc, int32_t code) {
  qj_outcome o;
  o.kind = kind;
  o.pc = pc;
  o.code = code;
  return o;
}

/* Locals every opcode body may rely on, bound from the VM at entry. */
#define QJ_ENV_BIND(vmptr)               \
  qj_vm *vm = (vmptr);                   \
  const qj_op *aOp = vm->aOp;            \
  qj_value *aMem = vm->aMem;             \
  const qj_op *pOp = aOp + vm->pc;       \
  int32_t rc = QJ_OK

#ifdef __cplusplus
}
#endif

#endif /* QJIT_VDBE_H */

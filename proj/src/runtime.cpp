// Runtime support exported to compiled regions. Built as a shared library so
// region modules resolve these symbols when they are loaded.
#include <cmath>
#include <cstring>

#include "qjit/vdbe.h"

namespace {

int type_rank(int32_t type) {
  switch (type) {
    case QJ_NULL: return 0;
    case QJ_INT:
    case QJ_REAL: return 1;
    default: return 2;
  }
}

int compare_reals(double a, double b) {
  bool na = std::isnan(a);
  bool nb = std::isnan(b);
  if (na || nb) return static_cast<int>(nb) - static_cast<int>(na);
  return (a > b) - (a < b);
}

// Exact comparison of an integer against a double, no rounding of i.
int compare_int_real(int64_t i, double r) {
  if (std::isnan(r)) return 1;
  if (r >= 9223372036854775808.0) return -1;
  if (r < -9223372036854775808.0) return 1;
  double t = std::trunc(r);
  auto ri = static_cast<int64_t>(t);
  if (i != ri) return i < ri ? -1 : 1;
  return r > t ? -1 : (r < t ? 1 : 0);
}

}  // namespace

extern "C" int qj_mem_compare(const qj_value *a, const qj_value *b) {
  int ra = type_rank(a->type);
  int rb = type_rank(b->type);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (ra == 0) return 0;
  if (ra == 2) {
    uint32_t n = a->n < b->n ? a->n : b->n;
    int c = n == 0 ? 0 : std::memcmp(a->u.z, b->u.z, n);
    if (c != 0) return c < 0 ? -1 : 1;
    return (a->n > b->n) - (a->n < b->n);
  }
  if (a->type == QJ_INT && b->type == QJ_INT) return (a->u.i > b->u.i) - (a->u.i < b->u.i);
  if (a->type == QJ_REAL && b->type == QJ_REAL) return compare_reals(a->u.r, b->u.r);
  if (a->type == QJ_INT) return compare_int_real(a->u.i, b->u.r);
  return -compare_int_real(b->u.i, a->u.r);
}

#include "qjit/value.hpp"

#include <cstdio>

namespace qjit {

Value Value::from_cell(const qj_value &cell) {
  switch (cell.type) {
    case QJ_INT: return integer(cell.u.i);
    case QJ_REAL: return real(cell.u.r);
    case QJ_TEXT: return text(std::string(cell.u.z, cell.n));
    default: return null();
  }
}

qj_value Value::cell() const {
  qj_value c{};
  c.type = static_cast<std::int32_t>(type());
  switch (type()) {
    case ValueType::Int: c.u.i = as_int(); break;
    case ValueType::Real: c.u.r = as_real(); break;
    case ValueType::Text:
      c.u.z = as_text().data();
      c.n = static_cast<std::uint32_t>(as_text().size());
      break;
    case ValueType::Null: break;
  }
  return c;
}

std::string Value::to_string() const {
  switch (type()) {
    case ValueType::Null: return "NULL";
    case ValueType::Int: return std::to_string(as_int());
    case ValueType::Real: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", as_real());
      return buf;
    }
    case ValueType::Text: return as_text();
  }
  return {};
}

Ordering to_ordering(int c) { return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal); }

Ordering compare_values(const Value &a, const Value &b) {
  qj_value ca = a.cell();
  qj_value cb = b.cell();
  return to_ordering(qj_mem_compare(&ca, &cb));
}

std::string_view type_name(ValueType t) {
  switch (t) {
    case ValueType::Null: return "Null";
    case ValueType::Int: return "Int";
    case ValueType::Real: return "Real";
    case ValueType::Text: return "Text";
  }
  return "?";
}

std::ostream &operator<<(std::ostream &os, const Value &v) {
  if (v.type() == ValueType::Text) return os << '\'' << v.as_text() << '\'';
  return os << v.to_string();
}

}  // namespace qjit

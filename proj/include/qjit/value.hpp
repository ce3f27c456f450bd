#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>

#include "qjit/vdbe.h"

namespace qjit {

enum class ValueType : std::int32_t { Null = QJ_NULL, Int = QJ_INT, Real = QJ_REAL, Text = QJ_TEXT };

enum class Ordering { Less = -1, Equal = 0, Greater = 1 };

/// Owning dynamically typed value. Registers and table cells use the
/// non-owning `qj_value`; this is the form handed to callers.
class Value {
 public:
  Value() = default;

  static Value null() { return Value(); }
  static Value integer(std::int64_t i) { return Value(Storage(std::in_place_index<1>, i)); }
  static Value real(double r) { return Value(Storage(std::in_place_index<2>, r)); }
  static Value text(std::string s) { return Value(Storage(std::in_place_index<3>, std::move(s))); }

  /// Copies the cell; text is copied out of table storage.
  static Value from_cell(const qj_value &cell);

  ValueType type() const { return static_cast<ValueType>(v_.index()); }
  bool is_null() const { return v_.index() == 0; }
  std::int64_t as_int() const { return std::get<1>(v_); }
  double as_real() const { return std::get<2>(v_); }
  const std::string &as_text() const { return std::get<3>(v_); }

  /// Non-owning view; valid while this Value is alive and unmodified.
  qj_value cell() const;

  /// Display form: NULL, integers in decimal, reals with 17 significant
  /// digits, text verbatim.
  std::string to_string() const;

  friend bool operator==(const Value &, const Value &) = default;

 private:
  using Storage = std::variant<std::monostate, std::int64_t, double, std::string>;
  explicit Value(Storage v) : v_(std::move(v)) {}
  Storage v_;
};

Ordering compare_values(const Value &a, const Value &b);
Ordering to_ordering(int c);
std::string_view type_name(ValueType t);
std::ostream &operator<<(std::ostream &os, const Value &v);

}  // namespace qjit

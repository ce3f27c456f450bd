#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "qjit/vdbe.h"

namespace qjit {

enum class Opcode : std::int32_t {
#define QJIT_OPCODE_ENUMERATOR(name) name = OP_##name,
  QJ_OPCODE_LIST(QJIT_OPCODE_ENUMERATOR)
#undef QJIT_OPCODE_ENUMERATOR
};

inline constexpr std::size_t kOpcodeCount = QJ_OPCODE_COUNT;

inline constexpr std::array<std::string_view, kOpcodeCount> kOpcodeNames = {
#define QJIT_OPCODE_NAME(name) std::string_view{#name},
    QJ_OPCODE_LIST(QJIT_OPCODE_NAME)
#undef QJIT_OPCODE_NAME
};

inline constexpr std::array<Opcode, kOpcodeCount> kAllOpcodes = {
#define QJIT_OPCODE_VALUE(name) Opcode::name,
    QJ_OPCODE_LIST(QJIT_OPCODE_VALUE)
#undef QJIT_OPCODE_VALUE
};

constexpr std::int32_t code_of(Opcode op) { return static_cast<std::int32_t>(op); }

constexpr std::string_view opcode_name(Opcode op) {
  return kOpcodeNames[static_cast<std::size_t>(op)];
}

constexpr std::optional<Opcode> opcode_from_code(std::int32_t code) {
  if (code < 0 || code >= static_cast<std::int32_t>(kOpcodeCount)) return std::nullopt;
  return static_cast<Opcode>(code);
}

constexpr std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    if (kOpcodeNames[i] == name) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

constexpr bool is_comparison(Opcode op) {
  switch (op) {
    case Opcode::Eq:
    case Opcode::Ne:
    case Opcode::Lt:
    case Opcode::Le:
    case Opcode::Gt:
    case Opcode::Ge:
      return true;
    default:
      return false;
  }
}

/// True when p2 of this opcode is a jump target.
constexpr bool uses_p2_as_jump(Opcode op) {
  switch (op) {
    case Opcode::Init:
    case Opcode::Goto:
    case Opcode::Rewind:
    case Opcode::Next:
      return true;
    default:
      return is_comparison(op);
  }
}

/// Comparison that is true exactly when `op` is false.
constexpr Opcode negate_comparison(Opcode op) {
  switch (op) {
    case Opcode::Eq: return Opcode::Ne;
    case Opcode::Ne: return Opcode::Eq;
    case Opcode::Lt: return Opcode::Ge;
    case Opcode::Le: return Opcode::Gt;
    case Opcode::Gt: return Opcode::Le;
    case Opcode::Ge: return Opcode::Lt;
    default: return op;
  }
}

}  // namespace qjit

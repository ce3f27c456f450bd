#include "qjit/program.hpp"

#include <algorithm>
#include <bitset>
#include <cstdio>
#include <deque>
#include <sstream>

#include "qjit/error.hpp"

namespace qjit {
namespace {

constexpr std::size_t kMaxTrackedCursors = 64;
using CursorSet = std::bitset<kMaxTrackedCursors>;

// Cursor operand of `op`, if it has one.
std::optional<std::int32_t> cursor_operand(const Op &op) {
  switch (opcode_of(op)) {
    case Opcode::OpenRead:
    case Opcode::Rewind:
    case Opcode::Column:
    case Opcode::Next:
      return op.p1;
    default:
      return std::nullopt;
  }
}

std::vector<std::int32_t> successors(const Op &op, std::int32_t pc) {
  switch (opcode_of(op)) {
    case Opcode::Init:
    case Opcode::Goto:
      return {op.p2};
    case Opcode::Halt:
      return {};
    default:
      if (uses_p2_as_jump(opcode_of(op))) return {pc + 1, op.p2};
      return {pc + 1};
  }
}

}  // namespace

Op make_op(Opcode opcode, std::int32_t p1, std::int32_t p2, std::int32_t p3) {
  Op op{};
  op.opcode = code_of(opcode);
  op.p1 = p1;
  op.p2 = p2;
  op.p3 = p3;
  return op;
}

std::vector<std::int32_t> registers_used(const Op &op) {
  switch (opcode_of(op)) {
    case Opcode::Integer: return {op.p2};
    case Opcode::Column: return {op.p3};
    case Opcode::Copy: return {op.p1, op.p2};
    case Opcode::ResultRow: {
      std::vector<std::int32_t> regs;
      for (std::int32_t r = op.p1; r < op.p1 + std::max(op.p2, 1); ++r) regs.push_back(r);
      return regs;
    }
    case Opcode::Eq:
    case Opcode::Ne:
    case Opcode::Lt:
    case Opcode::Le:
    case Opcode::Gt:
    case Opcode::Ge:
      return {op.p1, op.p3};
    default:
      return {};
  }
}

Program make_program(std::vector<Op> ops) {
  Program p;
  p.ops = std::move(ops);
  for (const Op &op : p.ops) {
    if (!opcode_from_code(op.opcode)) continue;
    for (std::int32_t r : registers_used(op)) p.register_count = std::max(p.register_count, r + 1);
    if (auto c = cursor_operand(op)) p.cursor_count = std::max(p.cursor_count, *c + 1);
  }
  return p;
}

void Program::reset_jit_state() {
  for (Op &op : ops) {
    op.hot_count = 0;
    op.compiled_entry = nullptr;
  }
}

std::uint64_t Program::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::int32_t v) {
    auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
      h ^= (u >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (const Op &op : ops) {
    mix(op.opcode);
    mix(op.p1);
    mix(op.p2);
    mix(op.p3);
  }
  return h;
}

std::string Program::explain() const {
  std::ostringstream os;
  char line[96];
  std::snprintf(line, sizeof line, "%-4s %-12s %6s %6s %6s\n", "addr", "opcode", "p1", "p2", "p3");
  os << line;
  for (std::size_t pc = 0; pc < ops.size(); ++pc) {
    const Op &op = ops[pc];
    auto code = opcode_from_code(op.opcode);
    std::string name = code ? std::string(opcode_name(*code)) : "?" + std::to_string(op.opcode);
    std::snprintf(line, sizeof line, "%-4zu %-12s %6d %6d %6d\n", pc, name.c_str(), op.p1, op.p2, op.p3);
    os << line;
  }
  return os.str();
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto &f : findings) out += "pc " + std::to_string(f.pc) + ": " + f.message + "\n";
  return out;
}

ValidationReport validate_program(const Program &program, std::optional<std::int32_t> register_file_size) {
  ValidationReport report;
  auto add = [&report](Finding::Kind kind, std::int32_t pc, std::string msg) {
    report.findings.push_back({kind, pc, std::move(msg)});
  };
  const auto n = static_cast<std::int32_t>(program.ops.size());
  if (n == 0) {
    add(Finding::Kind::Empty, 0, "program is empty");
    return report;
  }
  const std::int32_t nreg = register_file_size.value_or(program.register_count);

  bool structurally_ok = true;
  bool has_halt = false;
  for (std::int32_t pc = 0; pc < n; ++pc) {
    const Op &op = program.ops[pc];
    auto code = opcode_from_code(op.opcode);
    if (!code) {
      add(Finding::Kind::UnknownOpcode, pc, "unknown opcode " + std::to_string(op.opcode));
      structurally_ok = false;
      continue;
    }
    has_halt = has_halt || *code == Opcode::Halt;
    if (uses_p2_as_jump(*code) && (op.p2 < 0 || op.p2 >= n)) {
      add(Finding::Kind::JumpOutOfRange, pc,
          std::string(opcode_name(*code)) + " jumps to " + std::to_string(op.p2) + ", outside [0, " +
              std::to_string(n) + ")");
      structurally_ok = false;
    }
    for (std::int32_t r : registers_used(op)) {
      if (r < 0 || r >= nreg) {
        add(Finding::Kind::RegisterOutOfRange, pc,
            "register " + std::to_string(r) + " outside register file of size " + std::to_string(nreg));
      }
    }
    if (*code == Opcode::ResultRow && op.p2 < 1) {
      add(Finding::Kind::RegisterOutOfRange, pc, "ResultRow with no registers");
    }
    if (auto c = cursor_operand(op)) {
      if (*c < 0 || *c >= program.cursor_count || static_cast<std::size_t>(*c) >= kMaxTrackedCursors) {
        add(Finding::Kind::CursorOutOfRange, pc, "cursor " + std::to_string(*c) + " out of range");
        structurally_ok = false;
      }
    }
  }
  if (!structurally_ok) return report;
  if (!has_halt) add(Finding::Kind::NoHalt, n - 1, "program has no Halt");

  // Must-be-open cursors per instruction, intersected over predecessors.
  std::vector<CursorSet> in(n, CursorSet().set());
  std::vector<bool> reached(n, false);
  in[0].reset();
  reached[0] = true;
  std::deque<std::int32_t> work{0};
  std::vector<bool> fall_off(n, false);
  while (!work.empty()) {
    std::int32_t pc = work.front();
    work.pop_front();
    const Op &op = program.ops[pc];
    CursorSet out = in[pc];
    if (opcode_of(op) == Opcode::OpenRead) out.set(static_cast<std::size_t>(op.p1));
    for (std::int32_t s : successors(op, pc)) {
      if (s >= n) {
        fall_off[pc] = true;
        continue;
      }
      CursorSet merged = reached[s] ? (in[s] & out) : out;
      if (!reached[s] || merged != in[s]) {
        reached[s] = true;
        in[s] = merged;
        work.push_back(s);
      }
    }
  }
  for (std::int32_t pc = 0; pc < n; ++pc) {
    if (!reached[pc]) continue;
    const Op &op = program.ops[pc];
    if (fall_off[pc]) add(Finding::Kind::FallsOffEnd, pc, "execution can run past the last instruction");
    auto c = cursor_operand(op);
    if (c && opcode_of(op) != Opcode::OpenRead && !in[pc].test(static_cast<std::size_t>(*c))) {
      add(Finding::Kind::CursorBeforeOpen, pc,
          std::string(opcode_name(opcode_of(op))) + " uses cursor " + std::to_string(*c) +
              " before it is opened");
    }
  }
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding &a, const Finding &b) { return a.pc < b.pc; });
  return report;
}

void require_valid(const Program &program) {
  ValidationReport report = validate_program(program);
  if (!report.ok()) throw ExecutionError(QJ_MISUSE, report.findings.front().pc, report.to_string());
}

}  // namespace qjit

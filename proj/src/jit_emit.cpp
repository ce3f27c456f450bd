#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "qjit/error.hpp"
#include "qjit/jit.hpp"
#include "interp/semantics_hash.h"

namespace qjit {

void append_template_call(std::string &out, std::string_view macro, std::int32_t pos, std::string_view next,
                          const qj_op &op) {
  out += "  ";
  out += macro;
  out += "(" + std::to_string(pos) + ", ";
  out += next;
  out += ", " + std::to_string(op.p1) + ", " + std::to_string(op.p2) + ", " + std::to_string(op.p3) + ", " +
         std::to_string(op.opcode) + ")\n";
}

}  // namespace qjit

#include "templates/emitter_table.gen"

namespace qjit {

static_assert(QJ_SEMANTICS_HASH_TEMPLATES == QJ_SEMANTICS_SOURCE_HASH, "template library out of date");

const EmitterEntry *EmitterTable::find(Opcode op) const {
  for (const auto &e : entries) {
    if (e.opcode == op) return &e;
  }
  return nullptr;
}

EmitterTable default_emitter_table() {
  return EmitterTable{generated::kEmitterEntries, generated::kRegionLocals, generated::kSemanticsHash};
}

namespace {

void check_bounds(const Program &program, Region region) {
  auto n = static_cast<std::int32_t>(program.ops.size());
  if (region.head_pc < 0 || region.tail_pc >= n || region.head_pc > region.tail_pc) {
    throw JitError(JitError::Kind::NonTerminatingRegion,
                   "invalid region [" + std::to_string(region.head_pc) + ", " + std::to_string(region.tail_pc) + "]");
  }
}

const EmitterEntry &entry_for(const EmitterTable &table, const Op &op) {
  auto code = opcode_from_code(op.opcode);
  if (!code) throw JitError(JitError::Kind::UnsupportedOpcode, "unknown opcode " + std::to_string(op.opcode));
  const EmitterEntry *e = table.find(*code);
  if (!e) throw JitError(JitError::Kind::MissingTemplate, "no template for " + std::string(opcode_name(*code)));
  if (!e->compilable) {
    throw JitError(JitError::Kind::UnsupportedOpcode, std::string(opcode_name(*code)) + " is not compilable");
  }
  return *e;
}

bool inside(Region r, std::int32_t pc) { return pc >= r.head_pc && pc <= r.tail_pc; }

}  // namespace

void check_region_terminates(const Program &program, Region region, const EmitterTable &table) {
  check_bounds(program, region);
  std::vector<bool> seen(static_cast<std::size_t>(region.size()), false);
  std::vector<std::int32_t> work{region.head_pc};
  seen[0] = true;
  while (!work.empty()) {
    std::int32_t pc = work.back();
    work.pop_back();
    const Op &op = program.ops[static_cast<std::size_t>(pc)];
    std::uint32_t exits = entry_for(table, op).exit_kinds;
    if (exits & (kExitError | kExitHalt | kExitRow)) return;
    std::vector<std::int32_t> next;
    if (exits & kExitFallthrough) next.push_back(pc + 1);
    if (exits & kExitJumpP2) next.push_back(op.p2);
    for (std::int32_t s : next) {
      if (!inside(region, s)) return;
      auto idx = static_cast<std::size_t>(s - region.head_pc);
      if (!seen[idx]) {
        seen[idx] = true;
        work.push_back(s);
      }
    }
  }
  throw JitError(JitError::Kind::NonTerminatingRegion,
                 "region [" + std::to_string(region.head_pc) + ", " + std::to_string(region.tail_pc) +
                     "] never leaves or returns");
}

RegionSource emit_region_source(const Program &program, Region region, const EmitterTable &table, JitMode mode) {
  check_region_terminates(program, region, table);

  RegionSource src;
  char hash[17];
  std::uint64_t h = program.fingerprint();
  if (mode == JitMode::Specialized) h = (h ^ 0x73u) * 0x100000001b3ULL;
  std::snprintf(hash, sizeof hash, "%016" PRIx64, h);
  std::string span = std::to_string(region.head_pc) + "_" + std::to_string(region.tail_pc);
  src.file_stem = "region_" + std::string(hash) + "_" + span;
  src.symbol = "qjit_region_" + std::string(hash) + "_" + span;

  std::set<std::string> files;
  std::set<std::int32_t> exits;
  std::string body;
  for (std::int32_t pc = region.head_pc; pc <= region.tail_pc; ++pc) {
    const Op &op = program.ops[static_cast<std::size_t>(pc)];
    const EmitterEntry &e = entry_for(table, op);
    files.insert(e.template_file);
    bool int_variant = mode == JitMode::Specialized && e.int_macro != nullptr;
    e.emit(body, pc, "L" + std::to_string(pc + 1), op, int_variant);
    if ((e.exit_kinds & kExitFallthrough) && pc + 1 > region.tail_pc) exits.insert(pc + 1);
    if ((e.exit_kinds & kExitJumpP2) && !inside(region, op.p2)) exits.insert(op.p2);
  }

  std::string &out = src.text;
  out += "/* " + src.file_stem + ": ops " + std::to_string(region.head_pc) + ".." +
         std::to_string(region.tail_pc) + (mode == JitMode::Specialized ? ", specialized" : "") + " */\n";
  out += "#include \"qjit/vdbe.h\"\n";
  for (const auto &f : files) out += "#include \"" + f + "\"\n";
  out += "\nqj_outcome " + src.symbol + "(qj_vm *vm_in);\n\n";
  out += "qj_outcome " + src.symbol + "(qj_vm *vm_in) {\n";
  out += "  QJ_ENV_BIND(vm_in);\n";
  std::string_view locals = table.region_locals;
  while (!locals.empty()) {
    auto nl = locals.find('\n');
    out += "  ";
    out += locals.substr(0, nl);
    out += "\n";
    locals = nl == std::string_view::npos ? std::string_view{} : locals.substr(nl + 1);
  }
  out += "  goto L" + std::to_string(region.head_pc) + ";\n";
  out += body;
  for (std::int32_t pc : exits) {
    out += "L" + std::to_string(pc) + ":\n  return qj_outcome_make(QJ_OUT_EXIT, " + std::to_string(pc) +
           ", QJ_OK);\n";
  }
  out += "}\n";
  return src;
}

}  // namespace qjit

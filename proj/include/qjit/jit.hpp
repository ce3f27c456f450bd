#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "qjit/backends.hpp"
#include "qjit/opcode.hpp"
#include "qjit/program.hpp"

namespace qjit {

struct Region {
  std::int32_t head_pc = 0;
  std::int32_t tail_pc = 0;

  std::int32_t size() const { return tail_pc - head_pc + 1; }
  friend bool operator==(const Region &, const Region &) = default;
};

/// Counts backward jumps on the jump-target op and reports a region once,
/// when the count goes from threshold to threshold + 1.
class LoopDetector {
 public:
  static constexpr std::uint32_t kNever = std::numeric_limits<std::uint32_t>::max();

  explicit LoopDetector(std::uint32_t threshold = 8) : threshold_(threshold) {}

  std::optional<Region> observe_jump(Program &program, std::int32_t from_pc, std::int32_t to_pc);

  std::uint32_t threshold() const { return threshold_; }
  /// Last recorded tail for a head.
  std::optional<std::int32_t> tail_of(std::int32_t head_pc) const;

 private:
  std::uint32_t threshold_;
  std::map<std::int32_t, std::int32_t> tails_;
};

enum class JitMode { Generic, Specialized };

std::string default_toolchain();
std::filesystem::path default_include_dir();
std::filesystem::path default_template_dir();

struct JitConfig {
  /// Backward jumps tolerated before compiling; kNever disables the JIT.
  std::uint32_t threshold = 8;
  /// Passed as -O<opt_level>; a token starting with '-' is passed as is.
  std::string opt_level = "2";
  /// Compiler command prefix, split on whitespace.
  std::string toolchain = default_toolchain();
  /// Empty: a per-process directory under the system temp dir.
  std::filesystem::path temp_dir;
  bool keep_artifacts = false;
  JitMode mode = JitMode::Generic;
  std::filesystem::path include_dir = default_include_dir();
  std::filesystem::path template_dir = default_template_dir();

  /// Build-time defaults overridden by QJIT_TOOLCHAIN, QJIT_OPT,
  /// QJIT_THRESHOLD, QJIT_TMPDIR and QJIT_KEEP_ARTIFACTS.
  static JitConfig from_env();
};

/// Parses a threshold: a positive integer or "inf".
std::optional<std::uint32_t> parse_threshold(std::string_view text);

/// One row of the generated emitter table.
struct EmitterEntry {
  using EmitFn = void (*)(std::string &out, std::int32_t pos, std::string_view next, const qj_op &op,
                          bool int_variant);

  Opcode opcode;
  const char *template_file;
  const char *macro;
  const char *int_macro;  // null when there is no integer variant
  std::uint32_t exit_kinds;
  bool compilable;
  EmitFn emit;
};

/// Exit-kind bits recorded in EmitterEntry::exit_kinds.
enum : std::uint32_t {
  kExitFallthrough = 0x01,
  kExitJumpP2 = 0x02,
  kExitError = 0x04,
  kExitHalt = 0x08,
  kExitRow = 0x10,
  kExitDeopt = 0x20
};

struct EmitterTable {
  std::span<const EmitterEntry> entries;
  std::string_view region_locals;
  std::uint64_t semantics_hash = 0;

  const EmitterEntry *find(Opcode op) const;
};

/// The table generated from the semantics source at build time.
EmitterTable default_emitter_table();

/// Appends `MACRO(pos, next, p1, p2, p3, opcode)` and a newline.
void append_template_call(std::string &out, std::string_view macro, std::int32_t pos, std::string_view next,
                          const qj_op &op);

struct RegionSource {
  std::string text;
  std::string symbol;
  /// File name without extension: region_<programhash>_<head>_<tail>. The
  /// program hash also covers the mode.
  std::string file_stem;
};

/// Throws JitError(NonTerminatingRegion) if no path through the region leaves
/// it or returns.
void check_region_terminates(const Program &program, Region region, const EmitterTable &table);

RegionSource emit_region_source(const Program &program, Region region, const EmitterTable &table, JitMode mode);

struct CompiledModule {
  std::filesystem::path module_path;
  std::filesystem::path source_path;
  std::string symbol;
  std::int64_t compile_ns = 0;
};

CompiledModule compile_region(const RegionSource &source, const JitConfig &config);

/// Loads the module and records its entry on the op at head_pc. The module
/// stays loaded for the life of the process.
void load_and_install(const CompiledModule &module, Program &program, std::int32_t head_pc,
                      const JitConfig &config = {});

/// Switch interpretation with hot-loop detection, compilation and region
/// execution.
RunStats run_jit(Program &program, const Database &db, const RowSink &sink, const JitConfig &config,
                 RunOptions options = {});

/// Number of modules loaded so far in this process.
std::size_t loaded_module_count();

}  // namespace qjit

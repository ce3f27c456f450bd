#include <set>

#include "clock.hpp"
#include "qjit/jit.hpp"
#include "switch_interp.hpp"

namespace qjit {
namespace {

class JitHooks {
 public:
  static constexpr bool kJit = true;

  JitHooks(Program &program, const JitConfig &config, RunStats &stats)
      : program_(program), config_(config), stats_(stats), detector_(config.threshold),
        table_(default_emitter_table()) {}

  void backward_jump(std::int32_t from_pc, std::int32_t to_pc) {
    if (auto region = detector_.observe_jump(program_, from_pc, to_pc)) compile(*region);
  }

  qj_outcome enter(std::int32_t pc, qj_vm &vm) {
    ++stats_.region_calls;
    qj_outcome out = program_.ops[static_cast<std::size_t>(pc)].compiled_entry(&vm);
    if (out.kind == QJ_OUT_ROW) ++stats_.region_row_returns;
    if (out.kind == QJ_OUT_DEOPT) ++stats_.deopts;
    return out;
  }

 private:
  void compile(Region region) {
    // One attempt per head; failures leave the loop interpreted.
    if (!attempted_.insert(region.head_pc).second) return;
    try {
      RegionSource src = emit_region_source(program_, region, table_, config_.mode);
      CompiledModule mod = compile_region(src, config_);
      stats_.compile_ns += mod.compile_ns;
      load_and_install(mod, program_, region.head_pc, config_);
      ++stats_.compilations;
    } catch (const Error &e) {
      ++stats_.compile_failures;
      stats_.last_jit_error = e.what();
    }
  }

  Program &program_;
  const JitConfig &config_;
  RunStats &stats_;
  LoopDetector detector_;
  EmitterTable table_;
  std::set<std::int32_t> attempted_;
};

}  // namespace

RunStats run_jit(Program &program, const Database &db, const RowSink &sink, const JitConfig &config,
                 RunOptions options) {
  require_valid(program);
  RunStats stats;
  detail::Stopwatch clock;
  VmState state(program, db);
  JitHooks hooks(program, config, stats);
  if (options.count_instructions) {
    detail::interpret_switch<true>(state, sink, stats, hooks);
  } else {
    detail::interpret_switch<false>(state, sink, stats, hooks);
  }
  stats.cpu_ns = clock.cpu();
  stats.wall_ns = clock.wall();
  return stats;
}

}  // namespace qjit

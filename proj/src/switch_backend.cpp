#include <array>

#include "clock.hpp"
#include "qjit/jit.hpp"
#include "switch_interp.hpp"

namespace qjit {

RunStats run_switch(const Program &program, const Database &db, const RowSink &sink, RunOptions options) {
  require_valid(program);
  RunStats stats;
  detail::Stopwatch clock;
  VmState state(program, db);
  detail::NoJitHooks hooks;
  if (options.count_instructions) {
    detail::interpret_switch<true>(state, sink, stats, hooks);
  } else {
    detail::interpret_switch<false>(state, sink, stats, hooks);
  }
  stats.cpu_ns = clock.cpu();
  stats.wall_ns = clock.wall();
  return stats;
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Switch: return "switch";
    case Backend::Threaded: return "threaded";
    case Backend::Jit: return "jit";
    case Backend::JitSpecialized: return "jit-specialized";
  }
  return "?";
}

std::optional<Backend> backend_from_name(std::string_view name) {
  for (auto b : {Backend::Switch, Backend::Threaded, Backend::Jit, Backend::JitSpecialized}) {
    if (backend_name(b) == name) return b;
  }
  return std::nullopt;
}

RunStats run_backend(Backend backend, Program &program, const Database &db, const RowSink &sink,
                     const JitConfig *jit, RunOptions options) {
  switch (backend) {
    case Backend::Switch: return run_switch(program, db, sink, options);
    case Backend::Threaded: return run_threaded(program, db, sink, options);
    case Backend::Jit:
    case Backend::JitSpecialized: {
      JitConfig config = jit ? *jit : JitConfig::from_env();
      config.mode = backend == Backend::Jit ? JitMode::Generic : JitMode::Specialized;
      return run_jit(program, db, sink, config, options);
    }
  }
  return {};
}

RowSink RowCollector::sink() {
  return [this](RowView row) {
    std::vector<Value> values;
    values.reserve(row.size());
    for (const qj_value &cell : row) values.push_back(Value::from_cell(cell));
    rows.push_back(std::move(values));
    return SinkAction::Continue;
  };
}

}  // namespace qjit

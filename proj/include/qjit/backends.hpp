#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qjit/program.hpp"
#include "qjit/storage.hpp"
#include "qjit/value.hpp"

namespace qjit {

enum class SinkAction { Continue, Abort };

/// Registers of one result row; valid only during the sink call.
using RowView = std::span<const qj_value>;
using RowSink = std::function<SinkAction(RowView)>;

struct RunStats {
  std::uint64_t rows_emitted = 0;
  /// Instructions executed by the interpreter (not inside compiled regions).
  std::uint64_t instructions_retired = 0;
  std::int64_t wall_ns = 0;
  std::int64_t cpu_ns = 0;
  std::int64_t compile_ns = 0;
  std::uint32_t compilations = 0;
  std::uint32_t compile_failures = 0;
  std::uint64_t region_calls = 0;
  std::uint64_t region_row_returns = 0;
  std::uint64_t deopts = 0;
  bool aborted = false;
  /// Why the last failed compilation failed, if any did.
  std::string last_jit_error;
};

struct RunOptions {
  bool count_instructions = true;
};

RunStats run_switch(const Program &program, const Database &db, const RowSink &sink, RunOptions options = {});
RunStats run_threaded(const Program &program, const Database &db, const RowSink &sink, RunOptions options = {});

enum class Backend { Switch, Threaded, Jit, JitSpecialized };

std::string_view backend_name(Backend b);
std::optional<Backend> backend_from_name(std::string_view name);

struct JitConfig;

/// Runs on the chosen backend. `jit` may be null for the interpreters; the
/// JIT backends use JitConfig::from_env() defaults when it is null.
RunStats run_backend(Backend backend, Program &program, const Database &db, const RowSink &sink,
                     const JitConfig *jit = nullptr, RunOptions options = {});

/// Sink that stores every row.
struct RowCollector {
  std::vector<std::vector<Value>> rows;

  RowSink sink();
};

}  // namespace qjit

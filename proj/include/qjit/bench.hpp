#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qjit/backends.hpp"
#include "qjit/jit.hpp"
#include "qjit/storage.hpp"

namespace qjit {

struct BenchRecord {
  std::string experiment;  // A, B or C
  std::string backend;
  int loop_ops = 0;
  double selectivity = 0;
  std::uint64_t rows_out = 0;
  double wall_ms = 0;
  double cpu_ms = 0;
  double compile_ms = 0;
  int runs = 1;
};

inline constexpr const char *kCsvHeader = "experiment,backend,loop_ops,selectivity,rows_out,wall_ms,cpu_ms,compile_ms,runs";

void write_csv(std::ostream &os, const std::vector<BenchRecord> &records);
std::string to_csv_line(const BenchRecord &r);
/// Throws ReportError on a missing header, wrong field count or bad number.
std::vector<BenchRecord> read_csv(std::istream &is);
std::vector<BenchRecord> read_csv(const std::filesystem::path &path);

struct BenchOptions {
  int runs = 5;
  JitConfig jit;
  /// Re-execute `self_exe run ...` for every measured run; needs db_path.
  bool fresh_process = false;
  std::filesystem::path self_exe;
  std::filesystem::path db_path;
  std::string table = "test";
  std::function<void(const BenchRecord &)> on_record;
};

/// Loop-op count of the benchmark query with k pairs (and the bound group).
int bench_loop_ops(int k, bool with_bound);
/// Largest k whose loop does not exceed `loop_ops`.
int pairs_for_loop_ops(int loop_ops, bool with_bound);

/// Averages `runs` executions of `query`; every run starts from a fresh
/// program (no compiled entries carried over).
BenchRecord measure(const std::string &experiment, Backend backend, const std::string &query, const Database &db,
                    const BenchOptions &options);

std::vector<BenchRecord> run_exp_a(const Database &db, const std::vector<int> &op_counts, const BenchOptions &options);
std::vector<BenchRecord> run_exp_b(const Database &db, const std::vector<double> &selectivities,
                                   const BenchOptions &options, int target_loop_ops = 65);
std::vector<BenchRecord> run_exp_c(const Database &db, const std::vector<int> &op_counts, const BenchOptions &options);

/// Bound B such that `i<B AND i>-1` selects about `fraction` of a column
/// holding values in [lo, hi).
std::int64_t selectivity_bound(double fraction, std::int64_t lo, std::int64_t hi);

struct SpeedupRow {
  std::string experiment;
  int loop_ops = 0;
  double selectivity = 0;
  double baseline_cpu_ms = 0;
  std::map<std::string, double> speedup;  // backend -> switch cpu / backend cpu
  std::map<std::string, double> cpu_ms;
  std::map<std::string, double> compile_ms;
};

struct Report {
  std::vector<SpeedupRow> rows;
  std::map<std::string, double> max_speedup;
};

Report summarize(const std::vector<BenchRecord> &records);
std::string render_report(const Report &report);

/// Least-squares slope of y over x.
double fitted_slope(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace qjit

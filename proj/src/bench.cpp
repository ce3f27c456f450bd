#include "qjit/bench.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <tuple>
#include <sstream>

#include "json.hpp"
#include "qjit/error.hpp"
#include "qjit/planner.hpp"

extern char **environ;

namespace qjit {

// ---------------------------------------------------------------------------
// CSV

std::string to_csv_line(const BenchRecord &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%d,%.4f,%llu,%.3f,%.3f,%.3f,%d", r.experiment.c_str(), r.backend.c_str(),
                r.loop_ops, r.selectivity, static_cast<unsigned long long>(r.rows_out), r.wall_ms, r.cpu_ms,
                r.compile_ms, r.runs);
  return buf;
}

void write_csv(std::ostream &os, const std::vector<BenchRecord> &records) {
  os << kCsvHeader << "\n";
  for (const auto &r : records) os << to_csv_line(r) << "\n";
}

namespace {

std::vector<std::string> split(const std::string &line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_number(const std::string &s, int line_no, const char *what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ReportError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

}  // namespace

std::vector<BenchRecord> read_csv(std::istream &is) {
  std::string line;
  int line_no = 0;
  bool header = false;
  std::vector<BenchRecord> out;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kCsvHeader) throw ReportError("line " + std::to_string(line_no) + ": expected header '" + kCsvHeader + "'");
      header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != 9) {
      throw ReportError("line " + std::to_string(line_no) + ": expected 9 fields, found " + std::to_string(f.size()));
    }
    BenchRecord r;
    r.experiment = f[0];
    r.backend = f[1];
    r.loop_ops = static_cast<int>(to_number(f[2], line_no, "loop_ops"));
    r.selectivity = to_number(f[3], line_no, "selectivity");
    r.rows_out = static_cast<std::uint64_t>(to_number(f[4], line_no, "rows_out"));
    r.wall_ms = to_number(f[5], line_no, "wall_ms");
    r.cpu_ms = to_number(f[6], line_no, "cpu_ms");
    r.compile_ms = to_number(f[7], line_no, "compile_ms");
    r.runs = static_cast<int>(to_number(f[8], line_no, "runs"));
    if (r.runs < 1) throw ReportError("line " + std::to_string(line_no) + ": runs must be at least 1");
    out.push_back(std::move(r));
  }
  if (!header) throw ReportError("empty CSV");
  if (out.empty()) throw ReportError("CSV has no records");
  return out;
}

std::vector<BenchRecord> read_csv(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw ReportError("cannot open " + path.string());
  return read_csv(is);
}

// ---------------------------------------------------------------------------
// Measurement

int bench_loop_ops(int k, bool with_bound) { return 2 * (std::max(k, 1) + (with_bound ? 1 : 0)) + 4; }

int pairs_for_loop_ops(int loop_ops, bool with_bound) {
  int k = (loop_ops - 4) / 2 - (with_bound ? 1 : 0);
  return std::max(k, 0);
}

std::int64_t selectivity_bound(double fraction, std::int64_t lo, std::int64_t hi) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  return lo + std::llround(fraction * static_cast<double>(hi - lo));
}

namespace {

struct Totals {
  std::uint64_t rows = 0;
  double wall_ns = 0;
  double cpu_ns = 0;
  double compile_ns = 0;
};

Totals run_in_process(Backend backend, const Program &base, const Database &db, const BenchOptions &options) {
  Program program = base;
  program.reset_jit_state();
  std::uint64_t seen = 0;
  RowSink sink = [&seen](RowView) {
    ++seen;
    return SinkAction::Continue;
  };
  RunOptions run_options;
  run_options.count_instructions = false;
  RunStats s = run_backend(backend, program, db, sink, &options.jit, run_options);
  return Totals{s.rows_emitted, static_cast<double>(s.wall_ns), static_cast<double>(s.cpu_ns),
                static_cast<double>(s.compile_ns)};
}

std::string threshold_text(std::uint32_t t) { return t == LoopDetector::kNever ? "inf" : std::to_string(t); }

Totals run_fresh_process(Backend backend, const std::string &query, const BenchOptions &options) {
  if (options.db_path.empty() || options.self_exe.empty()) {
    throw Error("--fresh-process needs a database file and the path of the qjit binary");
  }
  char tmpl[] = "/tmp/qjit-stats-XXXXXX";
  int fd = mkstemp(tmpl);
  if (fd < 0) throw Error("mkstemp failed");
  close(fd);
  std::filesystem::path stats_path = tmpl;

  std::vector<std::string> args = {options.self_exe.string(),
                                   "run",
                                   "--db",
                                   options.db_path.string(),
                                   "--table",
                                   options.table,
                                   "--backend",
                                   std::string(backend_name(backend)),
                                   "--threshold",
                                   threshold_text(options.jit.threshold),
                                   "--opt",
                                   options.jit.opt_level,
                                   "--stats-json",
                                   stats_path.string(),
                                   "--quiet",
                                   "--query",
                                   query};
  std::vector<char *> argv;
  for (auto &a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  int err = posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ);
  if (err != 0) throw Error("cannot run " + args[0] + ": " + std::strerror(err));
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::filesystem::remove(stats_path);
    throw Error("child run failed for backend " + std::string(backend_name(backend)));
  }
  std::ifstream is(stats_path);
  nlohmann::json j = nlohmann::json::parse(is);
  std::filesystem::remove(stats_path);
  return Totals{j.at("rows_emitted").get<std::uint64_t>(), j.at("wall_ns").get<double>(),
                j.at("cpu_ns").get<double>(), j.at("compile_ns").get<double>()};
}

}  // namespace

BenchRecord measure(const std::string &experiment, Backend backend, const std::string &query, const Database &db,
                    const BenchOptions &options) {
  Program base = compile_query(query, db);
  BenchRecord rec;
  rec.experiment = experiment;
  rec.backend = std::string(backend_name(backend));
  rec.loop_ops = count_loop_ops(base);
  rec.runs = std::max(options.runs, 1);
  Totals sum;
  for (int i = 0; i < rec.runs; ++i) {
    Totals t = options.fresh_process ? run_fresh_process(backend, query, options)
                                     : run_in_process(backend, base, db, options);
    if (i > 0 && t.rows != sum.rows) throw Error("row count changed between runs");
    sum.rows = t.rows;
    sum.wall_ns += t.wall_ns;
    sum.cpu_ns += t.cpu_ns;
    sum.compile_ns += t.compile_ns;
  }
  rec.rows_out = sum.rows;
  rec.wall_ms = sum.wall_ns / rec.runs / 1e6;
  rec.cpu_ms = sum.cpu_ns / rec.runs / 1e6;
  rec.compile_ms = sum.compile_ns / rec.runs / 1e6;
  if (options.on_record) options.on_record(rec);
  return rec;
}

std::vector<BenchRecord> run_exp_a(const Database &db, const std::vector<int> &op_counts, const BenchOptions &options) {
  std::vector<BenchRecord> out;
  for (int ops : op_counts) {
    std::string q = gen_bench_query(pairs_for_loop_ops(ops, false));
    for (Backend b : {Backend::Switch, Backend::Threaded, Backend::Jit}) out.push_back(measure("A", b, q, db, options));
  }
  return out;
}

std::vector<BenchRecord> run_exp_b(const Database &db, const std::vector<double> &selectivities,
                                   const BenchOptions &options, int target_loop_ops) {
  auto id = db.find_table(options.table);
  if (!id) throw Error("no table '" + options.table + "'");
  const Table &t = db.table(*id);
  if (t.row_count() == 0) throw Error("experiment B needs a non-empty table");
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (std::int64_t r = 0; r < t.row_count(); ++r) {
    const qj_value &c = t.cell(r, 0);
    if (c.type != QJ_INT) throw Error("experiment B needs an integer column");
    lo = std::min(lo, c.u.i);
    hi = std::max(hi, c.u.i);
  }
  if (lo < 0) throw Error("experiment B expects non-negative data");

  // Nearest achievable loop size; ties go to the larger loop.
  int k = pairs_for_loop_ops(target_loop_ops, true);
  if (std::abs(bench_loop_ops(k + 1, true) - target_loop_ops) <= std::abs(bench_loop_ops(k, true) - target_loop_ops)) {
    ++k;
  }

  BenchOptions quiet = options;
  quiet.on_record = nullptr;
  std::vector<BenchRecord> out;
  for (double s : selectivities) {
    std::string q = gen_bench_query(k, selectivity_bound(s, 0, hi + 1));
    for (Backend b : {Backend::Switch, Backend::Threaded, Backend::Jit}) {
      BenchRecord rec = measure("B", b, q, db, quiet);
      rec.selectivity = static_cast<double>(rec.rows_out) / static_cast<double>(t.row_count());
      if (options.on_record) options.on_record(rec);
      out.push_back(rec);
    }
  }
  return out;
}

std::vector<BenchRecord> run_exp_c(const Database &db, const std::vector<int> &op_counts, const BenchOptions &options) {
  std::vector<BenchRecord> out;
  for (int ops : op_counts) {
    std::string q = gen_bench_query(pairs_for_loop_ops(ops, false));
    for (Backend b : {Backend::Switch, Backend::Jit, Backend::JitSpecialized}) {
      out.push_back(measure("C", b, q, db, options));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

Report summarize(const std::vector<BenchRecord> &records) {
  if (records.empty()) throw ReportError("no records");
  Report report;
  std::map<std::tuple<std::string, int, long long>, std::size_t> index;
  for (const auto &r : records) {
    auto key = std::make_tuple(r.experiment, r.loop_ops, std::llround(r.selectivity * 1e4));
    auto [it, inserted] = index.emplace(key, report.rows.size());
    if (inserted) {
      SpeedupRow row;
      row.experiment = r.experiment;
      row.loop_ops = r.loop_ops;
      row.selectivity = r.selectivity;
      report.rows.push_back(row);
    }
    SpeedupRow &row = report.rows[it->second];
    row.cpu_ms[r.backend] = r.cpu_ms;
    row.compile_ms[r.backend] = r.compile_ms;
  }
  for (auto &row : report.rows) {
    auto base = row.cpu_ms.find("switch");
    if (base == row.cpu_ms.end()) continue;
    row.baseline_cpu_ms = base->second;
    for (const auto &[backend, cpu] : row.cpu_ms) {
      if (backend == "switch" || cpu <= 0) continue;
      double s = row.baseline_cpu_ms / cpu;
      row.speedup[backend] = s;
      auto &best = report.max_speedup[backend];
      best = std::max(best, s);
    }
  }
  return report;
}

std::string render_report(const Report &report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-3s %8s %11s %12s  %s\n", "exp", "loop_ops", "selectivity", "switch_cpu", "speedups");
  os << line;
  for (const auto &row : report.rows) {
    std::snprintf(line, sizeof line, "%-3s %8d %11.4f %12.3f ", row.experiment.c_str(), row.loop_ops, row.selectivity,
                  row.baseline_cpu_ms);
    os << line;
    for (const auto &[backend, s] : row.speedup) {
      std::snprintf(line, sizeof line, " %s=%.2fx", backend.c_str(), s);
      os << line;
    }
    os << "\n";
  }
  for (const auto &[backend, s] : report.max_speedup) {
    std::snprintf(line, sizeof line, "max %s speedup: %.2fx\n", backend.c_str(), s);
    os << line;
  }
  return os.str();
}

double fitted_slope(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx == 0 ? 0 : sxy / sxx;
}

}  // namespace qjit

// qjit: run queries on the three backends and reproduce the experiments.
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qjit/bench.hpp"
#include "qjit/error.hpp"
#include "qjit/extract/emit.hpp"
#include "qjit/jit.hpp"
#include "qjit/planner.hpp"

namespace {

using namespace qjit;

struct GlobalFlags {
  std::string backend = "switch";
  std::string threshold;
  std::string opt;
  int runs = 5;
  std::uint64_t seed = 1;
  bool fresh_process = false;
  std::string stats_json;
  std::string out;
};

struct DataFlags {
  std::string db;
  std::string table = "test";
  std::string csv;
  std::string columns = "i:int";
  std::int64_t rows = 1000000;
  std::string range;
};

ValueRange parse_range(const std::string &text, std::int64_t rows) {
  if (text.empty()) return {0, std::max<std::int64_t>(rows, 1)};
  auto colon = text.find(':');
  if (colon == std::string::npos) throw Error("--range expects LO:HI");
  try {
    return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::exception &) {
    throw Error("--range expects LO:HI, got '" + text + "'");
  }
}

TableSchema parse_columns(const std::string &table, const std::string &spec) {
  TableSchema schema{table, {}};
  std::istringstream is(spec);
  for (std::string item; std::getline(is, item, ',');) {
    auto colon = item.find(':');
    std::string name = item.substr(0, colon);
    std::string type = colon == std::string::npos ? "any" : item.substr(colon + 1);
    auto t = column_type_from_name(type);
    if (name.empty() || !t) throw Error("bad column spec '" + item + "' (want name:int|real|text|any)");
    schema.columns.push_back({name, *t});
  }
  if (schema.columns.empty()) throw Error("--columns is empty");
  return schema;
}

Database load_database(const DataFlags &d, std::uint64_t seed) {
  Database db;
  if (!d.db.empty()) {
    db.add_table(load_table(d.db, d.table));
  } else if (!d.csv.empty()) {
    db.add_table(import_csv(d.csv, parse_columns(d.table, d.columns)));
  } else {
    db.add_table(generate_table(d.rows, seed, parse_range(d.range, d.rows), d.table));
  }
  return db;
}

JitConfig jit_config(const GlobalFlags &g) {
  JitConfig c = JitConfig::from_env();
  if (!g.threshold.empty()) {
    auto t = parse_threshold(g.threshold);
    if (!t) throw CLI::ValidationError("--threshold", "expected a positive integer or 'inf'");
    c.threshold = *t;
  }
  if (!g.opt.empty()) c.opt_level = g.opt;
  return c;
}

Backend backend_of(const GlobalFlags &g) {
  auto b = backend_from_name(g.backend);
  if (!b) throw CLI::ValidationError("--backend", "unknown backend '" + g.backend + "'");
  return *b;
}

nlohmann::json stats_json(const RunStats &s, Backend backend) {
  return {{"backend", backend_name(backend)},
          {"rows_emitted", s.rows_emitted},
          {"instructions_retired", s.instructions_retired},
          {"wall_ns", s.wall_ns},
          {"cpu_ns", s.cpu_ns},
          {"compile_ns", s.compile_ns},
          {"compilations", s.compilations},
          {"compile_failures", s.compile_failures},
          {"region_calls", s.region_calls},
          {"region_row_returns", s.region_row_returns},
          {"deopts", s.deopts}};
}

int cmd_run(const GlobalFlags &g, const DataFlags &d, const std::string &query, bool quiet, bool explain) {
  Backend backend = backend_of(g);
  JitConfig jit = jit_config(g);
  Database db = load_database(d, g.seed);
  Program program = compile_query(query, db);
  if (explain) std::cerr << program.explain();

  std::string buf;
  RowSink sink = [&](RowView row) {
    if (quiet) return SinkAction::Continue;
    buf.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) buf += '\t';
      buf += Value::from_cell(row[i]).to_string();
    }
    buf += '\n';
    std::fwrite(buf.data(), 1, buf.size(), stdout);
    return SinkAction::Continue;
  };
  RunOptions options;
  options.count_instructions = backend == Backend::Switch || backend == Backend::Threaded;
  RunStats s = run_backend(backend, program, db, sink, &jit, options);
  std::fflush(stdout);

  nlohmann::json j = stats_json(s, backend);
  if (!g.stats_json.empty()) {
    std::ofstream os(g.stats_json);
    os << j.dump(2) << "\n";
    if (!os) throw Error("cannot write " + g.stats_json);
  } else {
    std::cerr << j.dump() << "\n";
  }
  if (!s.last_jit_error.empty()) std::cerr << "qjit: region left interpreted: " << s.last_jit_error << "\n";
  return 0;
}

std::filesystem::path self_path(const char *argv0) {
  std::error_code ec;
  auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::filesystem::absolute(argv0) : p;
}

int cmd_experiment(char which, const GlobalFlags &g, DataFlags d, const std::vector<int> &op_counts,
                   const std::vector<double> &selectivities, int loop_ops, bool report, const char *argv0) {
  BenchOptions opts;
  opts.runs = g.runs;
  opts.jit = jit_config(g);
  opts.fresh_process = g.fresh_process;
  opts.table = d.table;
  opts.self_exe = self_path(argv0);
  opts.on_record = [](const BenchRecord &r) { std::cerr << to_csv_line(r) << "\n"; };

  Database db = load_database(d, g.seed);
  std::filesystem::path scratch_db;
  if (g.fresh_process) {
    if (d.db.empty()) {
      scratch_db = std::filesystem::temp_directory_path() / ("qjit-bench-" + std::to_string(getpid()) + ".qjdb");
      save_table(db.table(0), scratch_db);
      opts.db_path = scratch_db;
    } else {
      opts.db_path = d.db;
    }
  }

  std::vector<BenchRecord> records;
  try {
    if (which == 'A') records = run_exp_a(db, op_counts, opts);
    if (which == 'B') records = run_exp_b(db, selectivities, opts, loop_ops);
    if (which == 'C') records = run_exp_c(db, op_counts, opts);
  } catch (...) {
    if (!scratch_db.empty()) std::filesystem::remove(scratch_db);
    throw;
  }
  if (!scratch_db.empty()) std::filesystem::remove(scratch_db);

  if (g.out.empty()) {
    write_csv(std::cout, records);
  } else {
    std::ofstream os(g.out);
    write_csv(os, records);
    if (!os) throw Error("cannot write " + g.out);
  }
  if (report) std::cerr << render_report(summarize(records));
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Bytecode query engine with switch, threaded and template-JIT backends"};
  app.require_subcommand(1);
  GlobalFlags g;
  DataFlags d;

  auto add_globals = [&](CLI::App *cmd) {
    cmd->add_option("--backend", g.backend, "switch | threaded | jit | jit-specialized");
    cmd->add_option("--threshold", g.threshold, "Backward jumps before a loop is compiled, or 'inf'");
    cmd->add_option("--opt", g.opt, "Optimization level for compiled regions (default 2)");
    cmd->add_option("--runs", g.runs, "Runs averaged per measurement")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", g.seed, "Seed for generated data");
    cmd->add_flag("--fresh-process", g.fresh_process, "Run every measurement in a new process");
    cmd->add_option("--stats-json", g.stats_json, "Write run statistics as JSON to this file");
    cmd->add_option("--out", g.out, "Output file");
  };
  auto add_data = [&](CLI::App *cmd) {
    cmd->add_option("--db", d.db, "Table file written by make-data");
    cmd->add_option("--table", d.table, "Table name queries refer to");
    cmd->add_option("--csv", d.csv, "Import a headerless CSV instead of --db");
    cmd->add_option("--columns", d.columns, "CSV schema, e.g. i:int,s:text");
    cmd->add_option("--rows", d.rows, "Rows to generate when no file is given")->check(CLI::NonNegativeNumber);
    cmd->add_option("--range", d.range, "Generated value range LO:HI (default 0:rows)");
  };

  std::string query;
  bool quiet = false;
  bool explain = false;
  auto *run = app.add_subcommand("run", "Run one query and print its rows as TSV");
  add_globals(run);
  add_data(run);
  run->add_option("--query,query", query, "Query text")->required();
  run->add_flag("--quiet", quiet, "Do not print rows");
  run->add_flag("--explain", explain, "Print the bytecode to stderr");

  std::vector<int> op_counts = {10, 20, 30, 40, 50, 60};
  std::vector<double> selectivities = {0, 0.2, 0.4, 0.6, 0.8, 1.0};
  int loop_ops = 65;
  bool report = false;
  auto *exp_a = app.add_subcommand("exp-a", "Loop size sweep on empty-result queries");
  auto *exp_b = app.add_subcommand("exp-b", "Selectivity sweep");
  auto *exp_c = app.add_subcommand("exp-c", "Specialized templates vs generic");
  for (auto *cmd : {exp_a, exp_b, exp_c}) {
    add_globals(cmd);
    add_data(cmd);
    cmd->add_flag("--report", report, "Print a speedup summary to stderr");
  }
  exp_a->add_option("--op-counts", op_counts, "Loop-op counts")->delimiter(',');
  exp_c->add_option("--op-counts", op_counts, "Loop-op counts")->delimiter(',');
  exp_b->add_option("--selectivities", selectivities, "Result fractions")->delimiter(',');
  exp_b->add_option("--loop-ops", loop_ops, "Target loop size");

  auto *make_data = app.add_subcommand("make-data", "Generate a table (or convert a CSV) to a table file");
  add_globals(make_data);
  add_data(make_data);

  std::string semantics = QJIT_SEMANTICS_PATH;
  std::string interp_out;
  bool specialize = true;
  auto *templates = app.add_subcommand("templates", "Extract opcode templates from the semantics source");
  templates->add_option("--semantics", semantics, "Semantics source")->check(CLI::ExistingFile);
  templates->add_option("--out", g.out, "Output directory")->required();
  templates->add_option("--interp-out", interp_out, "Also write interpreter sources here");
  templates->add_flag("--specialize,!--no-specialize", specialize, "Emit integer comparison variants");

  std::string csv_path;
  auto *report_cmd = app.add_subcommand("report", "Summarize an experiment CSV");
  report_cmd->add_option("csv", csv_path, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(g, d, query, quiet, explain);
    if (*exp_a) return cmd_experiment('A', g, d, op_counts, selectivities, loop_ops, report, argv[0]);
    if (*exp_b) return cmd_experiment('B', g, d, op_counts, selectivities, loop_ops, report, argv[0]);
    if (*exp_c) return cmd_experiment('C', g, d, op_counts, selectivities, loop_ops, report, argv[0]);
    if (*make_data) {
      if (g.out.empty()) throw CLI::ValidationError("--out", "make-data needs --out");
      Database db = load_database(d, g.seed);
      save_table(db.table(0), g.out);
      std::cerr << "wrote " << db.table(0).row_count() << " rows to " << g.out << "\n";
      return 0;
    }
    if (*templates) {
      auto lib = extract::run_extractor(semantics, g.out, specialize, interp_out);
      std::cerr << "wrote " << lib.template_files.size() << " template files and " << lib.table_file.string() << "\n";
      return 0;
    }
    if (*report_cmd) {
      std::cout << render_report(summarize(read_csv(std::filesystem::path(csv_path))));
      return 0;
    }
  } catch (const CLI::ValidationError &e) {
    std::cerr << "qjit: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "qjit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

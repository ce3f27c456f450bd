#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "qjit/error.hpp"
#include "qjit/extract/printer.hpp"
#include "qjit/jit.hpp"
#include "support.hpp"

namespace qjit {
namespace {

using testing::Rows;
using testing::TempDir;

const char *kScanQuery = "SELECT i FROM test WHERE i<20";

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

JitError::Kind jit_error_kind(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const JitError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no JitError";
  return JitError::Kind::Io;
}

Program scan_program() {
  Database db = testing::single_table_db(testing::int_table({1}));
  return compile_query(kScanQuery, db);
}

TEST(Detector, CountsOnJumpTarget) {
  Program p = scan_program();
  LoopDetector d(8);
  EXPECT_FALSE(d.observe_jump(p, 8, 3));
  EXPECT_EQ(p.ops[3].hot_count, 1u);
  EXPECT_EQ(d.tail_of(3), 8);
}

TEST(Detector, ForwardJumpsIgnored) {
  Program p = scan_program();
  LoopDetector d(8);
  EXPECT_FALSE(d.observe_jump(p, 3, 9));
  EXPECT_EQ(p.ops[9].hot_count, 0u);
  EXPECT_FALSE(d.tail_of(9));
}

TEST(Detector, FiresOnceAfterThreshold) {
  Program p = scan_program();
  LoopDetector d(8);
  for (int n = 1; n <= 8; ++n) EXPECT_FALSE(d.observe_jump(p, 8, 3)) << n;
  auto region = d.observe_jump(p, 8, 3);
  ASSERT_TRUE(region);
  EXPECT_EQ(*region, (Region{3, 8}));
  EXPECT_FALSE(d.observe_jump(p, 8, 3));
  EXPECT_FALSE(d.observe_jump(p, 8, 3));
}

TEST(Detector, NeverFires) {
  Program p = scan_program();
  LoopDetector d(LoopDetector::kNever);
  for (int n = 0; n < 100; ++n) EXPECT_FALSE(d.observe_jump(p, 7, 3));
}

TEST(Threshold, Parse) {
  EXPECT_EQ(parse_threshold("8"), 8u);
  EXPECT_EQ(parse_threshold("inf"), LoopDetector::kNever);
  EXPECT_FALSE(parse_threshold("0"));
  EXPECT_FALSE(parse_threshold("-1"));
  EXPECT_FALSE(parse_threshold("x"));
}

TEST(Emitter, TableCoversEveryOpcode) {
  EmitterTable table = default_emitter_table();
  for (Opcode op : kAllOpcodes) {
    const EmitterEntry *e = table.find(op);
    ASSERT_NE(e, nullptr) << opcode_name(op);
    EXPECT_EQ(e->opcode, op);
    EXPECT_EQ(e->int_macro != nullptr, is_comparison(op)) << opcode_name(op);
  }
}

TEST(Emitter, ScanRegionGolden) {
  Program p = scan_program();
  RegionSource src = emit_region_source(p, {3, 7}, default_emitter_table(), JitMode::Generic);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.fingerprint()));
  std::string golden = read_file(std::filesystem::path(QJIT_FIXTURES) / "region_scan.golden");
  for (auto at = golden.find("@HASH@"); at != std::string::npos; at = golden.find("@HASH@")) {
    golden.replace(at, 6, hash);
  }
  EXPECT_EQ(extract::normalize_whitespace(src.text), extract::normalize_whitespace(golden)) << src.text;
  EXPECT_EQ(src.file_stem, "region_" + std::string(hash) + "_3_7");
}

TEST(Emitter, SpecializedRegionUsesGuardedTemplates) {
  Program p = scan_program();
  RegionSource generic = emit_region_source(p, {3, 7}, default_emitter_table(), JitMode::Generic);
  RegionSource spec = emit_region_source(p, {3, 7}, default_emitter_table(), JitMode::Specialized);
  EXPECT_NE(spec.text.find("GE_INT_TEMPL(4, L5, 2, 7, 1, 16)"), std::string::npos) << spec.text;
  EXPECT_EQ(generic.text.find("INT_TEMPL"), std::string::npos);
  EXPECT_NE(spec.file_stem, generic.file_stem);
}

TEST(Emitter, SelfLoopRejected) {
  Program p = make_program({make_op(Opcode::Init, 0, 1), make_op(Opcode::Goto, 0, 1), make_op(Opcode::Halt)});
  EXPECT_EQ(jit_error_kind([&] { emit_region_source(p, {1, 1}, default_emitter_table(), JitMode::Generic); }),
            JitError::Kind::NonTerminatingRegion);
}

TEST(Compile, ValidSourceProducesModule) {
  TempDir dir;
  JitConfig config = testing::test_jit_config();
  config.temp_dir = dir.path();
  Program p = scan_program();
  RegionSource src = emit_region_source(p, {3, 7}, default_emitter_table(), JitMode::Generic);
  CompiledModule mod = compile_region(src, config);
  EXPECT_TRUE(std::filesystem::exists(mod.module_path));
  EXPECT_FALSE(std::filesystem::exists(mod.source_path));
  EXPECT_GT(mod.compile_ns, 0);

  load_and_install(mod, p, 3, config);
  EXPECT_NE(p.ops[3].compiled_entry, nullptr);
  EXPECT_EQ(jit_error_kind([&] { load_and_install(mod, p, 3, config); }), JitError::Kind::AlreadyInstalled);
}

TEST(Compile, BrokenSourceIsCompileFailed) {
  TempDir dir;
  JitConfig config = testing::test_jit_config();
  config.temp_dir = dir.path();
  RegionSource src{"int broken( {\n", "broken", "region_broken"};
  try {
    compile_region(src, config);
    FAIL();
  } catch (const JitError &e) {
    EXPECT_EQ(e.kind(), JitError::Kind::CompileFailed);
    EXPECT_NE(e.diagnostics().find("error"), std::string::npos) << e.diagnostics();
  }
}

TEST(Compile, MissingToolchain) {
  JitConfig config = testing::test_jit_config();
  config.toolchain = "/nonexistent/qjit-cc";
  Program p = scan_program();
  RegionSource src = emit_region_source(p, {3, 7}, default_emitter_table(), JitMode::Generic);
  EXPECT_EQ(jit_error_kind([&] { compile_region(src, config); }), JitError::Kind::ToolchainMissing);
}

class FaultInjection : public ::testing::TestWithParam<std::string> {};

TEST_P(FaultInjection, RunFallsBackToInterpretation) {
  Database db = testing::single_table_db(generate_table(2000, 3, {0, 100}));
  JitConfig config = testing::test_jit_config(2);
  config.toolchain = GetParam();
  RunStats stats;
  Rows rows = testing::run_query(Backend::Jit, kScanQuery, db, &config, &stats);
  EXPECT_EQ(rows, testing::run_query(Backend::Switch, kScanQuery, db));
  EXPECT_EQ(stats.compilations, 0u);
  EXPECT_EQ(stats.compile_failures, 1u);
  EXPECT_EQ(stats.region_calls, 0u);
  EXPECT_FALSE(stats.last_jit_error.empty());
}

// "false" fails every compile; "true" succeeds without writing a module, so
// loading fails.
INSTANTIATE_TEST_SUITE_P(Toolchains, FaultInjection, ::testing::Values("/nonexistent/qjit-cc", "false", "true"),
                         [](const auto &info) { return std::to_string(info.index); });

TEST(RunJit, ThresholdInfinityMatchesSwitch) {
  Database db = testing::single_table_db(generate_table(1000, 5, {0, 40}));
  JitConfig config = testing::test_jit_config(LoopDetector::kNever);
  RunStats jit, sw;
  Rows a = testing::run_query(Backend::Jit, kScanQuery, db, &config, &jit);
  Rows b = testing::run_query(Backend::Switch, kScanQuery, db, nullptr, &sw);
  EXPECT_EQ(a, b);
  EXPECT_EQ(jit.compilations, 0u);
  EXPECT_EQ(jit.instructions_retired, sw.instructions_retired);
  EXPECT_EQ(jit.rows_emitted, sw.rows_emitted);
}

TEST(RunJit, BenchmarkQueryCompilesOnce) {
  Database db = testing::single_table_db(generate_table(1000000, 1, {0, 1000000}));
  JitConfig config = testing::test_jit_config(8);
  RunStats stats;
  Rows rows = testing::run_query(Backend::Jit, gen_bench_query(10), db, &config, &stats);
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(stats.compilations, 1u);
  EXPECT_EQ(stats.region_calls, 1u);
  EXPECT_GT(stats.compile_ns, 0);
}

TEST(RunJit, RowsLeaveTheRegionOneAtATime) {
  const std::uint32_t threshold = 4;
  Table t = generate_table(3000, 9, {0, 100});
  Database db = testing::single_table_db(t);
  JitConfig config = testing::test_jit_config(threshold);
  RunStats stats;
  Rows rows = testing::run_query(Backend::Jit, kScanQuery, db, &config, &stats);
  ASSERT_EQ(rows, testing::run_query(Backend::Switch, kScanQuery, db));
  // The loop fires on back-edge threshold+1, after row `threshold`; later rows run compiled.
  std::uint64_t inside = 0;
  for (std::int64_t r = threshold + 1; r < t.row_count(); ++r) inside += t.cell(r, 0).u.i < 20;
  EXPECT_EQ(stats.region_row_returns, inside);
  // Every Row return is followed by a fresh entry unless the scan ended on it.
  bool last_matches = t.cell(t.row_count() - 1, 0).u.i < 20;
  EXPECT_EQ(stats.region_calls, inside + (last_matches ? 0 : 1));
}

TEST(RunJit, SpecializedDeoptsOnMixedColumn) {
  Database db = testing::single_table_db(testing::mixed_table(5000, 12));
  std::string q = gen_bench_query(3, 500);
  for (JitMode mode : {JitMode::Generic, JitMode::Specialized}) {
    JitConfig config = testing::test_jit_config(2);
    config.mode = mode;
    RunStats stats;
    Backend b = mode == JitMode::Generic ? Backend::Jit : Backend::JitSpecialized;
    Rows rows = testing::run_query(b, q, db, &config, &stats);
    EXPECT_EQ(rows, testing::run_query(Backend::Switch, q, db));
    EXPECT_EQ(stats.compilations, 1u);
    if (mode == JitMode::Specialized) {
      EXPECT_GT(stats.deopts, 0u);
    } else {
      EXPECT_EQ(stats.deopts, 0u);
    }
  }
}

TEST(RunJit, KeepArtifacts) {
  TempDir dir;
  Database db = testing::single_table_db(generate_table(100, 2, {0, 40}));
  Program p = compile_query(kScanQuery, db);
  JitConfig config = testing::test_jit_config(2);
  config.temp_dir = dir.path();
  config.keep_artifacts = true;
  RowCollector rows;
  RunStats stats = run_jit(p, db, rows.sink(), config);
  ASSERT_EQ(stats.compilations, 1u);
  char stem[64];
  std::snprintf(stem, sizeof stem, "region_%016llx_3_7", static_cast<unsigned long long>(p.fingerprint()));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / (std::string(stem) + ".c")));
  int modules = 0;
  for (const auto &e : std::filesystem::directory_iterator(dir.path())) modules += e.path().extension() == ".so";
  EXPECT_EQ(modules, 1);
  EXPECT_NE(p.ops[3].compiled_entry, nullptr);
}

TEST(RunJit, RandomQueriesBothModes) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 12; ++n) {
    Table t = n % 3 == 0 ? testing::mixed_table(400, rng()) : generate_table(400, rng(), {-30, 30});
    Database db = testing::single_table_db(t);
    Predicate pred = testing::random_predicate(rng, 3, -35, 35);
    std::string q = "SELECT i FROM test WHERE " + to_string(pred);
    Rows expect = testing::oracle_filter(db.table(0), pred);
    for (Backend b : {Backend::Jit, Backend::JitSpecialized}) {
      JitConfig config = testing::test_jit_config(3);
      RunStats stats;
      ASSERT_EQ(testing::run_query(b, q, db, &config, &stats), expect) << q;
      EXPECT_EQ(stats.compilations, 1u) << stats.last_jit_error;
    }
  }
}

TEST(Config, FromEnvironment) {
  setenv("QJIT_THRESHOLD", "17", 1);
  setenv("QJIT_OPT", "1", 1);
  setenv("QJIT_KEEP_ARTIFACTS", "1", 1);
  JitConfig c = JitConfig::from_env();
  unsetenv("QJIT_THRESHOLD");
  unsetenv("QJIT_OPT");
  unsetenv("QJIT_KEEP_ARTIFACTS");
  EXPECT_EQ(c.threshold, 17u);
  EXPECT_EQ(c.opt_level, "1");
  EXPECT_TRUE(c.keep_artifacts);
  EXPECT_EQ(JitConfig::from_env().threshold, 8u);
  EXPECT_EQ(JitConfig::from_env().opt_level, "2");
}

}  // namespace
}  // namespace qjit

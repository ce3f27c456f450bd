#include <gtest/gtest.h>

#include "qjit/error.hpp"
#include "qjit/planner.hpp"
#include "qjit/vm.hpp"
#include "support.hpp"

namespace qjit {
namespace {

bool has_finding(const ValidationReport &r, Finding::Kind kind) {
  for (const auto &f : r.findings) {
    if (f.kind == kind) return true;
  }
  return false;
}

Program ten_halts() {
  std::vector<Op> ops(10, make_op(Opcode::Halt));
  return make_program(ops);
}

TEST(Validate, PlannedProgramIsClean) {
  Database db = testing::single_table_db(testing::int_table({5, 25, 7}));
  Program p = compile_query("SELECT i FROM test WHERE i<20;", db);
  EXPECT_TRUE(validate_program(p).ok()) << validate_program(p).to_string();
}

TEST(Validate, JumpOutOfRange) {
  Program p = make_program({make_op(Opcode::Goto, 0, 5)});
  auto report = validate_program(p);
  ASSERT_EQ(report.findings.size(), 1u) << report.to_string();
  EXPECT_EQ(report.findings[0].kind, Finding::Kind::JumpOutOfRange);
  EXPECT_EQ(report.findings[0].pc, 0);
}

TEST(Validate, RegisterBeyondFile) {
  Program p = make_program({make_op(Opcode::Integer, 1, 3), make_op(Opcode::Halt)});
  EXPECT_TRUE(validate_program(p).ok());
  auto report = validate_program(p, 2);
  EXPECT_TRUE(has_finding(report, Finding::Kind::RegisterOutOfRange)) << report.to_string();
}

TEST(Validate, OtherFindings) {
  EXPECT_TRUE(has_finding(validate_program(Program{}), Finding::Kind::Empty));
  EXPECT_TRUE(has_finding(validate_program(make_program({make_op(Opcode::Integer, 1, 0)})),
                          Finding::Kind::FallsOffEnd));
  Program unknown = make_program({make_op(Opcode::Halt)});
  unknown.ops[0].opcode = 99;
  EXPECT_TRUE(has_finding(validate_program(unknown), Finding::Kind::UnknownOpcode));
  Program early_column = make_program(
      {make_op(Opcode::Column, 0, 0, 1), make_op(Opcode::OpenRead, 0, 0), make_op(Opcode::Halt)});
  EXPECT_TRUE(has_finding(validate_program(early_column), Finding::Kind::CursorBeforeOpen));
  Program loop = make_program({make_op(Opcode::Goto, 0, 0)});
  EXPECT_TRUE(has_finding(validate_program(loop), Finding::Kind::NoHalt));
}

TEST(Validate, RequireValidThrowsMisuse) {
  Program p = make_program({make_op(Opcode::Goto, 0, 5)});
  try {
    require_valid(p);
    FAIL() << "expected ExecutionError";
  } catch (const ExecutionError &e) {
    EXPECT_EQ(e.code(), QJ_MISUSE);
  }
}

TEST(Step, IntegerStoresLiteral) {
  Database db;
  Program p = make_program({make_op(Opcode::Integer, 20, 2), make_op(Opcode::Halt)});
  VmState s(p, db);
  StepOutcome out = step(s, db, p);
  EXPECT_EQ(out.kind, StepOutcome::Kind::Continue);
  EXPECT_EQ(s.reg(2), Value::integer(20));
  EXPECT_EQ(s.pc(), 1);
}

TEST(Step, GeTakesJump) {
  Database db;
  Program p = ten_halts();
  p.ops[0] = make_op(Opcode::Ge, 1, 8, 3);
  p = make_program(p.ops);
  VmState s(p, db);
  s.raw().aMem[1] = Value::integer(20).cell();
  s.raw().aMem[3] = Value::integer(25).cell();
  EXPECT_EQ(step(s, db, p).kind, StepOutcome::Kind::Continue);
  EXPECT_EQ(s.pc(), 8);

  VmState t(p, db);
  t.raw().aMem[1] = Value::integer(20).cell();
  t.raw().aMem[3] = Value::integer(19).cell();
  step(t, db, p);
  EXPECT_EQ(t.pc(), 1);
}

TEST(Step, CopyOntoItselfIsIdentity) {
  Database db;
  Program p = make_program({make_op(Opcode::Copy, 4, 4), make_op(Opcode::Halt)});
  VmState s(p, db);
  s.raw().aMem[4] = Value::integer(7).cell();
  EXPECT_EQ(step(s, db, p).kind, StepOutcome::Kind::Continue);
  EXPECT_EQ(s.reg(4), Value::integer(7));
  EXPECT_EQ(s.pc(), 1);
}

TEST(Step, ResultRowAndHalt) {
  Database db;
  Program p = make_program({make_op(Opcode::ResultRow, 1, 2), make_op(Opcode::Halt)});
  VmState s(p, db);
  StepOutcome row = step(s, db, p);
  EXPECT_EQ(row.kind, StepOutcome::Kind::Row);
  EXPECT_EQ(row.first_reg, 1);
  EXPECT_EQ(row.reg_count, 2);
  EXPECT_EQ(row.resume_pc, 1);
  s.resume();
  EXPECT_EQ(step(s, db, p).kind, StepOutcome::Kind::Halted);
}

TEST(Step, UncheckedOperandsReportErrors) {
  Database db;
  Program p = make_program({make_op(Opcode::Halt)});
  p.ops.insert(p.ops.begin(), make_op(Opcode::Integer, 1, 50));
  VmState s(p, db);
  StepOutcome out = step(s, db, p);
  EXPECT_EQ(out.kind, StepOutcome::Kind::Error);
  EXPECT_EQ(out.code, QJ_BAD_REGISTER);

  Program q = make_program({make_op(Opcode::Rewind, 0, 1), make_op(Opcode::Halt)});
  VmState t(q, db);
  EXPECT_EQ(step(t, db, q).code, QJ_BAD_CURSOR);

  Program r = make_program({make_op(Opcode::OpenRead, 0, 3), make_op(Opcode::Halt)});
  VmState u(r, db);
  EXPECT_EQ(step(u, db, r).code, QJ_NO_SUCH_TABLE);
}

TEST(Step, Deterministic) {
  Database db = testing::single_table_db(testing::int_table({5, 25, 7}));
  Program p = compile_query("SELECT i FROM test WHERE i<20", db);
  VmState a(p, db);
  VmState b(p, db);
  for (int n = 0; n < 40; ++n) {
    if (a.status() == VmStatus::Halted) break;
    StepOutcome x = step(a, db, p);
    StepOutcome y = step(b, db, p);
    ASSERT_EQ(x.kind, y.kind);
    ASSERT_EQ(a.pc(), b.pc());
    for (std::int32_t r = 0; r < a.register_count(); ++r) ASSERT_EQ(a.reg(r), b.reg(r));
    if (x.kind == StepOutcome::Kind::Row) {
      a.resume();
      b.resume();
    }
  }
  EXPECT_EQ(a.status(), VmStatus::Halted);
}

TEST(Program, FingerprintAndExplain) {
  Database db = testing::single_table_db(testing::int_table({1}));
  Program p = compile_query("SELECT i FROM test WHERE i<20", db);
  Program q = compile_query("SELECT i FROM test WHERE i<21", db);
  EXPECT_NE(p.fingerprint(), q.fingerprint());
  p.ops[3].hot_count = 5;
  EXPECT_EQ(p.fingerprint(), compile_query("SELECT i FROM test WHERE i<20", db).fingerprint());
  EXPECT_NE(p.explain().find("ResultRow"), std::string::npos);
  p.reset_jit_state();
  EXPECT_EQ(p.ops[3].hot_count, 0u);
}

}  // namespace
}  // namespace qjit

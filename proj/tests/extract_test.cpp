#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "qjit/extract/emit.hpp"
#include "qjit/extract/parser.hpp"
#include "qjit/extract/printer.hpp"
#include "qjit/extract/transform.hpp"
#include "support.hpp"

namespace qjit::extract {
namespace {

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shipped_source() { return read_file(QJIT_SEMANTICS_PATH); }

ExtractError::Kind extract_error(const std::string &text) {
  try {
    SemanticsAst ast = parse_semantics_text(text);
    build_template_set(ast, true);
  } catch (const ExtractError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "extraction accepted the input";
  return ExtractError::Kind::Io;
}

const CaseBlock &block_for(const std::vector<CaseBlock> &blocks, Opcode op) {
  for (const auto &b : blocks) {
    if (b.serves(op)) return b;
  }
  throw std::runtime_error("no block");
}

const Template &template_for(const TemplateSet &set, Opcode op, bool int_variant = false) {
  for (const auto &t : set.templates) {
    if (t.opcode == op && t.int_specialized == int_variant) return t;
  }
  throw std::runtime_error("no template");
}

TEST(Parse, ShippedSemantics) {
  SemanticsAst ast = parse_semantics_source(QJIT_SEMANTICS_PATH);
  EXPECT_EQ(ast.dispatch_constructs(), 1);
  EXPECT_GE(ast.clauses.size(), 12u);
  EXPECT_EQ(ast.source_hash, fnv1a64(shipped_source()));
}

TEST(Parse, EmptyFileIsParseError) {
  try {
    parse_semantics_text("");
    FAIL();
  } catch (const ExtractError &e) {
    EXPECT_EQ(e.kind(), ExtractError::Kind::Parse);
  }
}

TEST(Parse, NestedDispatchIsSubsetViolation) {
  std::string text = shipped_source();
  std::string marker = "case OP_Goto: {\n";
  auto at = text.find(marker);
  ASSERT_NE(at, std::string::npos);
  text.insert(at + marker.size(), "      switch (pOp->p1) { case 1: break; }\n");
  EXPECT_EQ(extract_error(text), ExtractError::Kind::SubsetViolation);
}

TEST(Parse, LoopInCaseIsSubsetViolation) {
  std::string text = shipped_source();
  std::string marker = "case OP_Goto: {\n";
  text.insert(text.find(marker) + marker.size(), "      while (res) { res = 0; }\n");
  EXPECT_EQ(extract_error(text), ExtractError::Kind::SubsetViolation);
}

TEST(Parse, SyntaxErrorHasPosition) {
  try {
    parse_semantics_text("int f(qj_vm *vm) {\n  switch (pOp->opcode) {\n    case OP_Init: { goto ; }\n  }\n}\n");
    FAIL();
  } catch (const ExtractError &e) {
    EXPECT_EQ(e.kind(), ExtractError::Kind::Parse);
    EXPECT_EQ(e.pos().line, 3);
  }
}

TEST(CaseBlocks, CoverTheInstructionSet) {
  SemanticsAst ast = parse_semantics_source(QJIT_SEMANTICS_PATH);
  auto blocks = extract_case_blocks(ast);
  std::set<Opcode> seen;
  for (const auto &b : blocks) seen.insert(b.opcodes.begin(), b.opcodes.end());
  EXPECT_EQ(seen, std::set<Opcode>(kAllOpcodes.begin(), kAllOpcodes.end()));
}

TEST(CaseBlocks, ComparisonsShareOneBlock) {
  auto blocks = extract_case_blocks(parse_semantics_source(QJIT_SEMANTICS_PATH));
  const CaseBlock &ge = block_for(blocks, Opcode::Ge);
  std::vector<Opcode> expect = {Opcode::Eq, Opcode::Ne, Opcode::Lt, Opcode::Le, Opcode::Gt, Opcode::Ge};
  EXPECT_EQ(ge.opcodes, expect);
  EXPECT_EQ(ge.group_name(), "eq");
}

TEST(CaseBlocks, MissingGeCase) {
  std::string text = shipped_source();
  auto at = text.find("case OP_Ge: {");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 13, "{");
  try {
    extract_case_blocks(parse_semantics_text(text));
    FAIL();
  } catch (const ExtractError &e) {
    EXPECT_EQ(e.kind(), ExtractError::Kind::MissingOpcode);
    EXPECT_NE(std::string(e.what()).find("Ge"), std::string::npos);
  }
}

TEST(Transform, GeGolden) {
  SemanticsAst ast = parse_semantics_source(std::filesystem::path(QJIT_FIXTURES) / "ge_case.c");
  auto blocks = extract_case_blocks(ast);
  Template t = transform_block(block_for(blocks, Opcode::Ge), Opcode::Ge);
  std::string golden = read_file(std::filesystem::path(QJIT_FIXTURES) / "ge_templ.golden");
  EXPECT_EQ(normalize_whitespace(render_template(t)), normalize_whitespace(golden)) << render_template(t);
  EXPECT_EQ(t.macro_name, "GE_TEMPL");
  EXPECT_EQ(t.parameters, kTemplateParameters);
  EXPECT_TRUE(t.has_exit(kExitJumpToP2));
  EXPECT_TRUE(t.has_exit(kExitFallthroughNext));
  EXPECT_TRUE(t.has_exit(kExitError));
  EXPECT_FALSE(t.has_exit(kExitRow));
}

TEST(Transform, HaltOnlyHalts) {
  TemplateSet set = build_template_set(parse_semantics_source(QJIT_SEMANTICS_PATH), false);
  const Template &halt = template_for(set, Opcode::Halt);
  EXPECT_EQ(halt.exit_kinds, static_cast<unsigned>(kExitHalt));
  std::string text = render_template(halt);
  EXPECT_EQ(text.find("goto next"), std::string::npos);
  EXPECT_NE(text.find("QJ_OUT_HALT"), std::string::npos);
}

TEST(Transform, ResultRowReturnsResumePosition) {
  TemplateSet set = build_template_set(parse_semantics_source(QJIT_SEMANTICS_PATH), false);
  const Template &row = template_for(set, Opcode::ResultRow);
  EXPECT_EQ(row.exit_kinds, static_cast<unsigned>(kExitRow));
  std::string expect =
      "#define RESULTROW_TEMPL(pos, next, P1, P2, P3, OPC) \\\n"
      "L##pos: { \\\n"
      "  pOp = &aOp[pos]; \\\n"
      "  vm->row_first = P1; \\\n"
      "  vm->row_count = P2; \\\n"
      "  return qj_outcome_make(QJ_OUT_ROW, pos + 1, QJ_OK); \\\n"
      "}\n";
  EXPECT_EQ(normalize_whitespace(render_template(row)), normalize_whitespace(expect));
}

TEST(Transform, LocalLabelsArePositioned) {
  TemplateSet set = build_template_set(parse_semantics_source(QJIT_SEMANTICS_PATH), false);
  std::string text = render_template(template_for(set, Opcode::Column));
  EXPECT_NE(text.find("goto column_done_##pos;"), std::string::npos);
  EXPECT_NE(text.find("column_done_##pos:"), std::string::npos);
  EXPECT_NE(text.find("return qj_outcome_make(QJ_OUT_ERROR, pos, rc);"), std::string::npos);
}

TEST(Transform, NoResidualDispatch) {
  TemplateSet set = build_template_set(parse_semantics_source(QJIT_SEMANTICS_PATH), true);
  for (const auto &t : set.templates) {
    std::string text = render_template(t);
    for (const char *bad : {"switch", "pOp->", "jump_to_p2", "abort_due_to_error", "halt_exit", "row_exit", "break;"}) {
      EXPECT_EQ(text.find(bad), std::string::npos) << t.macro_name << " contains " << bad;
    }
  }
}

TEST(Specialize, ComparisonVariantsGuardTypes) {
  TemplateSet set = build_template_set(parse_semantics_source(QJIT_SEMANTICS_PATH), true);
  int variants = 0;
  for (const auto &t : set.templates) {
    if (!t.int_specialized) continue;
    ++variants;
    EXPECT_TRUE(is_comparison(t.opcode));
    EXPECT_TRUE(t.has_exit(kExitDeopt));
    std::string text = render_template(t);
    EXPECT_NE(text.find("QJ_OUT_DEOPT"), std::string::npos);
    EXPECT_NE(text.find("qj_int_compare"), std::string::npos);
    EXPECT_EQ(text.find("qj_mem_compare"), std::string::npos);
  }
  EXPECT_EQ(variants, 6);
  EXPECT_EQ(template_for(set, Opcode::Ge, true).macro_name, "GE_INT_TEMPL");
}

TEST(Emit, OneFilePerGroupPlusTable) {
  testing::TempDir dir;
  TemplateSet set = build_template_set(parse_semantics_source(QJIT_SEMANTICS_PATH), true);
  EmittedLibrary lib = emit_template_library(set, dir.path());
  auto blocks = extract_case_blocks(parse_semantics_source(QJIT_SEMANTICS_PATH));
  EXPECT_EQ(lib.template_files.size(), blocks.size());
  EXPECT_TRUE(std::filesystem::exists(lib.table_file));
  std::size_t files = std::distance(std::filesystem::directory_iterator(dir.path()), {});
  EXPECT_EQ(files, blocks.size() + 1);
}

TEST(Emit, EmptyTemplateSetIsMissingOpcode) {
  testing::TempDir dir;
  try {
    emit_template_library(TemplateSet{}, dir.path());
    FAIL();
  } catch (const ExtractError &e) {
    EXPECT_EQ(e.kind(), ExtractError::Kind::MissingOpcode);
  }
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
}

TEST(Emit, Idempotent) {
  testing::TempDir a, b;
  run_extractor(QJIT_SEMANTICS_PATH, a.path() / "t", true, a.path() / "i");
  run_extractor(QJIT_SEMANTICS_PATH, b.path() / "t", true, b.path() / "i");
  for (const char *sub : {"t", "i"}) {
    for (const auto &entry : std::filesystem::directory_iterator(a.path() / sub)) {
      auto other = b.path() / sub / entry.path().filename();
      ASSERT_TRUE(std::filesystem::exists(other)) << other;
      EXPECT_EQ(read_file(entry.path()), read_file(other)) << entry.path().filename();
    }
  }
}

TEST(Emit, SwitchCasesReprintTheSource) {
  SemanticsAst ast = parse_semantics_source(QJIT_SEMANTICS_PATH);
  std::string cases = render_switch_cases(ast);
  EXPECT_NE(cases.find("case OP_Ge:"), std::string::npos);
  EXPECT_NE(cases.find("goto jump_to_p2;"), std::string::npos);
  std::string handlers = render_threaded_handlers(ast);
  EXPECT_EQ(handlers.find("switch"), std::string::npos);
  EXPECT_NE(handlers.find("QJ_NEXT()"), std::string::npos);
}

TEST(Printer, NormalizeWhitespace) {
  EXPECT_EQ(normalize_whitespace("a  b\\\n  c ( d )"), "a b c(d)");
}

TEST(Tool, ExitCodes) {
  testing::TempDir dir;
  std::string tool = QJIT_TEMPLATES_TOOL;
  std::string ok = tool + " --semantics " + QJIT_SEMANTICS_PATH + " --out " + (dir.path() / "o").string();
  EXPECT_EQ(std::system(ok.c_str()), 0);
  std::ofstream(dir.path() / "empty.c").flush();
  std::string bad = tool + " --semantics " + (dir.path() / "empty.c").string() + " --out " +
                    (dir.path() / "p").string() + " 2>/dev/null";
  EXPECT_NE(std::system(bad.c_str()), 0);
}

}  // namespace
}  // namespace qjit::extract

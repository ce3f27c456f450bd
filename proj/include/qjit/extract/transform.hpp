#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qjit/extract/ast.hpp"
#include "qjit/opcode.hpp"

namespace qjit::extract {

/// Labels the semantics source may jump to outside its own case block.
inline constexpr std::string_view kJumpToP2Label = "jump_to_p2";
inline constexpr std::string_view kErrorLabel = "abort_due_to_error";
inline constexpr std::string_view kHaltLabel = "halt_exit";
inline constexpr std::string_view kRowLabel = "row_exit";

/// The code executed for one `case` of the dispatch construct. A fall-through
/// group (several empty labels before one body) is a single block.
struct CaseBlock {
  std::vector<Opcode> opcodes;
  std::shared_ptr<const Stmt> body;  // always a Compound
  SourcePos begin;
  SourcePos end;

  /// Lower-case name of the first opcode; names the group's template file.
  std::string group_name() const;
  bool serves(Opcode op) const;
};

enum ExitKind : unsigned {
  kExitFallthroughNext = 1u << 0,
  kExitJumpToP2 = 1u << 1,
  kExitError = 1u << 2,
  kExitHalt = 1u << 3,
  kExitRow = 1u << 4,
  kExitDeopt = 1u << 5,
};

std::string exit_kinds_to_string(unsigned kinds);

/// Parametric code for one opcode. Instantiated as a C macro call
/// `NAME(pos, next, P1, P2, P3, OPC)`.
struct Template {
  Opcode opcode = Opcode::Init;
  std::string group;
  std::string macro_name;
  std::vector<std::string> parameters;
  std::shared_ptr<const Stmt> body;  // Label(L##pos, Compound)
  unsigned exit_kinds = 0;
  bool int_specialized = false;

  bool has_exit(ExitKind k) const { return (exit_kinds & k) != 0; }
};

inline const std::vector<std::string> kTemplateParameters = {"pos", "next", "P1", "P2", "P3", "OPC"};

/// Depth-first walk of the dispatch construct, one block per clause in source
/// order. Throws MissingOpcode if any ISA opcode has no case.
std::vector<CaseBlock> extract_case_blocks(const SemanticsAst &ast);

/// Rewrites a case block into the template for `opcode`.
Template transform_block(const CaseBlock &block, Opcode opcode);

/// Integer-only variants of the comparison templates: an entry guard returns
/// Deopt unless both compared registers hold integers, and the generic
/// comparison call is replaced by a direct integer compare. The input
/// templates are kept; variants are appended.
std::vector<Template> specialize_comparison_templates(std::vector<Template> templates);

/// `#define NAME(params) \ ...` text of a template.
std::string render_template(const Template &t);

/// Everything emitted for the JIT from one semantics source.
struct TemplateSet {
  std::vector<Template> templates;
  std::string region_locals;  // declarations placed in each region prologue
  std::uint64_t source_hash = 0;
  std::string source_name;
};

/// Parses nothing; runs extraction and transformation over an AST.
TemplateSet build_template_set(const SemanticsAst &ast, bool specialize);

}  // namespace qjit::extract

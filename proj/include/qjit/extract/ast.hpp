#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qjit/error.hpp"

namespace qjit::extract {

struct SourcePos {
  int line = 0;
  int column = 0;
};

class ExtractError : public Error {
 public:
  enum class Kind { Parse, SubsetViolation, MissingOpcode, UnrewritableJump, Io };

  ExtractError(Kind kind, const std::string &what, SourcePos pos = {})
      : Error(pos.line > 0 ? std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what : what),
        kind_(kind),
        pos_(pos) {}

  Kind kind() const { return kind_; }
  SourcePos pos() const { return pos_; }

 private:
  Kind kind_;
  SourcePos pos_;
};

enum class ExprKind { Ident, IntLit, Paren, Prefix, Postfix, Binary, Ternary, Call, Index, Member };

/// Expression node. `text` holds the identifier, literal spelling, operator or
/// member name depending on kind; operands live in `kids` in source order.
struct Expr {
  ExprKind kind = ExprKind::Ident;
  SourcePos pos;
  std::string text;
  bool arrow = false;  // Member: `->` rather than `.`
  std::vector<std::unique_ptr<Expr>> kids;

  std::unique_ptr<Expr> clone() const;
};
using ExprPtr = std::unique_ptr<Expr>;

ExprPtr make_ident(std::string name, SourcePos pos = {});
ExprPtr make_expr(ExprKind kind, std::string text, std::vector<ExprPtr> kids, SourcePos pos = {});

enum class StmtKind { Compound, If, ExprStmt, Goto, Label, Break, Return, Empty, Decl };

/// Statement node.
///   Compound: children in `body`.
///   If: `expr` is the condition, body[0] then-branch, optional body[1] else.
///   Goto / Label: `text` is the label; Label wraps body[0].
///   Return / ExprStmt: `expr`.
///   Decl: `text` is the full declaration without the trailing semicolon.
struct Stmt {
  StmtKind kind = StmtKind::Empty;
  SourcePos pos;
  std::string text;
  ExprPtr expr;
  std::vector<std::unique_ptr<Stmt>> body;

  std::unique_ptr<Stmt> clone() const;
};
using StmtPtr = std::unique_ptr<Stmt>;

StmtPtr make_stmt(StmtKind kind, SourcePos pos = {});
StmtPtr make_goto(std::string label, SourcePos pos = {});
StmtPtr make_label(std::string label, StmtPtr inner, SourcePos pos = {});
StmtPtr make_expr_stmt(ExprPtr e, SourcePos pos = {});
StmtPtr make_return(ExprPtr e, SourcePos pos = {});
StmtPtr make_compound(std::vector<StmtPtr> children, SourcePos pos = {});

/// One arm of the dispatch construct: consecutive `case` labels sharing a body.
struct CaseClause {
  std::vector<std::string> labels;  // opcode names without the OP_ prefix
  std::vector<SourcePos> label_pos;
  std::vector<StmtPtr> stmts;
  SourcePos begin;
  SourcePos end;
};

/// Parsed semantics source: local declarations plus the single dispatch.
struct SemanticsAst {
  std::string source_name;
  std::uint64_t source_hash = 0;
  std::string function_name;
  std::vector<StmtPtr> declarations;
  ExprPtr dispatch_operand;
  SourcePos dispatch_pos;
  std::vector<CaseClause> clauses;

  /// Always 1 for a successfully parsed file.
  int dispatch_constructs() const { return dispatch_operand ? 1 : 0; }
};

/// FNV-1a over raw bytes; used to tie generated artifacts to their source.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qjit::extract

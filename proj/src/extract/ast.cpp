#include "qjit/extract/ast.hpp"

namespace qjit::extract {

ExprPtr Expr::clone() const {
  auto out = std::make_unique<Expr>();
  out->kind = kind;
  out->pos = pos;
  out->text = text;
  out->arrow = arrow;
  out->kids.reserve(kids.size());
  for (const auto &k : kids) out->kids.push_back(k->clone());
  return out;
}

StmtPtr Stmt::clone() const {
  auto out = std::make_unique<Stmt>();
  out->kind = kind;
  out->pos = pos;
  out->text = text;
  if (expr) out->expr = expr->clone();
  out->body.reserve(body.size());
  for (const auto &b : body) out->body.push_back(b->clone());
  return out;
}

ExprPtr make_ident(std::string name, SourcePos pos) {
  auto e = std::make_unique<Expr>();
  e->kind = ExprKind::Ident;
  e->text = std::move(name);
  e->pos = pos;
  return e;
}

ExprPtr make_expr(ExprKind kind, std::string text, std::vector<ExprPtr> kids, SourcePos pos) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->text = std::move(text);
  e->kids = std::move(kids);
  e->pos = pos;
  return e;
}

StmtPtr make_stmt(StmtKind kind, SourcePos pos) {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->pos = pos;
  return s;
}

StmtPtr make_goto(std::string label, SourcePos pos) {
  auto s = make_stmt(StmtKind::Goto, pos);
  s->text = std::move(label);
  return s;
}

StmtPtr make_label(std::string label, StmtPtr inner, SourcePos pos) {
  auto s = make_stmt(StmtKind::Label, pos);
  s->text = std::move(label);
  s->body.push_back(std::move(inner));
  return s;
}

StmtPtr make_expr_stmt(ExprPtr e, SourcePos pos) {
  auto s = make_stmt(StmtKind::ExprStmt, pos);
  s->expr = std::move(e);
  return s;
}

StmtPtr make_return(ExprPtr e, SourcePos pos) {
  auto s = make_stmt(StmtKind::Return, pos);
  s->expr = std::move(e);
  return s;
}

StmtPtr make_compound(std::vector<StmtPtr> children, SourcePos pos) {
  auto s = make_stmt(StmtKind::Compound, pos);
  s->body = std::move(children);
  return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qjit::extract

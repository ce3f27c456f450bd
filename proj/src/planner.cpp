#include "qjit/planner.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <map>

#include "qjit/error.hpp"

namespace qjit {

std::string_view cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Le: return "<=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
  }
  return "?";
}

Opcode cmp_opcode(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return Opcode::Lt;
    case CmpOp::Gt: return Opcode::Gt;
    case CmpOp::Le: return Opcode::Le;
    case CmpOp::Ge: return Opcode::Ge;
    case CmpOp::Eq: return Opcode::Eq;
    case CmpOp::Ne: return Opcode::Ne;
  }
  return Opcode::Eq;
}

bool cmp_holds(CmpOp op, Ordering ord) {
  switch (op) {
    case CmpOp::Lt: return ord == Ordering::Less;
    case CmpOp::Gt: return ord == Ordering::Greater;
    case CmpOp::Le: return ord != Ordering::Greater;
    case CmpOp::Ge: return ord != Ordering::Less;
    case CmpOp::Eq: return ord == Ordering::Equal;
    case CmpOp::Ne: return ord != Ordering::Equal;
  }
  return false;
}

Predicate Predicate::compare(std::string column, CmpOp op, std::int64_t literal) {
  Predicate p;
  p.kind = Kind::Atom;
  p.atom = Atom{std::move(column), op, literal};
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
  if (children.size() == 1) return std::move(children.front());
  Predicate p;
  p.kind = Kind::And;
  p.children = std::move(children);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
  if (children.size() == 1) return std::move(children.front());
  Predicate p;
  p.kind = Kind::Or;
  p.children = std::move(children);
  return p;
}

std::string to_string(const Predicate &p) {
  switch (p.kind) {
    case Predicate::Kind::True: return "TRUE";
    case Predicate::Kind::Atom:
      return p.atom.column + std::string(cmp_symbol(p.atom.op)) + std::to_string(p.atom.literal);
    case Predicate::Kind::And:
    case Predicate::Kind::Or: {
      std::string sep = p.kind == Predicate::Kind::And ? " AND " : " OR ";
      std::string out = "(";
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i) out += sep;
        out += to_string(p.children[i]);
      }
      return out + ")";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum class Kind { Ident, Int, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class QueryLexer {
 public:
  explicit QueryLexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Token::Kind::Ident;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        t.kind = Token::Kind::Int;
        t.text += advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) t.text += advance();
      } else {
        t.kind = Token::Kind::Symbol;
        std::string_view two = text_.substr(pos_, 2);
        if (two == "<=" || two == ">=" || two == "<>") {
          t.text += advance();
          t.text += advance();
        } else if (std::string_view("()<>=;").find(c) != std::string_view::npos) {
          t.text += advance();
        } else {
          throw SyntaxError(std::string("unexpected character '") + c + "'", line_, column_);
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

class QueryParser {
 public:
  explicit QueryParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  QueryAst parse() {
    QueryAst ast;
    keyword("SELECT");
    ast.column = ident("column name");
    keyword("FROM");
    ast.table = ident("table name");
    if (is_keyword("WHERE")) {
      ++pos_;
      ast.predicate = parse_or();
    }
    if (peek().kind == Token::Kind::Symbol && peek().text == ";") ++pos_;
    if (peek().kind != Token::Kind::End) fail("expected end of query");
    return ast;
  }

 private:
  Predicate parse_or() {
    std::vector<Predicate> parts{parse_and()};
    while (is_keyword("OR")) {
      ++pos_;
      parts.push_back(parse_and());
    }
    return Predicate::any_of(std::move(parts));
  }

  Predicate parse_and() {
    std::vector<Predicate> parts{parse_atom()};
    while (is_keyword("AND")) {
      ++pos_;
      parts.push_back(parse_atom());
    }
    return Predicate::all_of(std::move(parts));
  }

  Predicate parse_atom() {
    if (peek().kind == Token::Kind::Symbol && peek().text == "(") {
      ++pos_;
      Predicate inner = parse_or();
      symbol(")");
      return inner;
    }
    std::string column = ident("column name or '('");
    const Token &op = peek();
    if (op.kind != Token::Kind::Symbol) fail("expected comparison operator");
    CmpOp cmp;
    if (op.text == "<") cmp = CmpOp::Lt;
    else if (op.text == ">") cmp = CmpOp::Gt;
    else if (op.text == "<=") cmp = CmpOp::Le;
    else if (op.text == ">=") cmp = CmpOp::Ge;
    else if (op.text == "=") cmp = CmpOp::Eq;
    else if (op.text == "<>") cmp = CmpOp::Ne;
    else fail("expected comparison operator");
    ++pos_;
    const Token &lit = peek();
    if (lit.kind != Token::Kind::Int) fail("expected integer literal");
    std::int64_t value = 0;
    std::string_view digits = lit.text;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || p != digits.data() + digits.size()) fail("integer literal out of 64-bit range");
    ++pos_;
    return Predicate::compare(std::move(column), cmp, value);
  }

  const Token &peek() const { return toks_[pos_]; }

  bool is_keyword(std::string_view kw) const {
    return peek().kind == Token::Kind::Ident && iequals(peek().text, kw);
  }

  void keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail("expected " + std::string(kw));
    ++pos_;
  }

  void symbol(std::string_view s) {
    if (peek().kind != Token::Kind::Symbol || peek().text != s) fail("expected '" + std::string(s) + "'");
    ++pos_;
  }

  std::string ident(std::string_view what) {
    if (peek().kind != Token::Kind::Ident) fail("expected " + std::string(what));
    return toks_[pos_++].text;
  }

  [[noreturn]] void fail(const std::string &what) const {
    const Token &t = peek();
    std::string found = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(what + ", found " + found, t.line, t.column);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

QueryAst parse_query(std::string_view text) { return QueryParser(QueryLexer(text).run()).parse(); }

// ---------------------------------------------------------------------------
// Code generation

namespace {

constexpr std::int32_t kCursor = 0;

class LoopEmitter {
 public:
  LoopEmitter(std::vector<Op> &ops, const std::map<std::string, std::int32_t> &column_regs,
              const std::map<std::int64_t, std::int32_t> &literal_regs)
      : ops_(ops), column_regs_(column_regs), literal_regs_(literal_regs) {}

  // Label ids resolve to instruction positions once placed.
  int new_label() {
    labels_.push_back(-1);
    return static_cast<int>(labels_.size() - 1);
  }
  void place(int label) { labels_[static_cast<std::size_t>(label)] = static_cast<std::int32_t>(ops_.size()); }

  // Falls through when `p` holds, jumps to `on_false` otherwise.
  void jump_if_false(const Predicate &p, int on_false) {
    switch (p.kind) {
      case Predicate::Kind::True: return;
      case Predicate::Kind::Atom: emit_compare(p.atom, negate_comparison(cmp_opcode(p.atom.op)), on_false); return;
      case Predicate::Kind::And:
        for (const auto &c : p.children) jump_if_false(c, on_false);
        return;
      case Predicate::Kind::Or: {
        int on_true = new_label();
        for (std::size_t i = 0; i + 1 < p.children.size(); ++i) jump_if_true(p.children[i], on_true);
        jump_if_false(p.children.back(), on_false);
        place(on_true);
        return;
      }
    }
  }

  // Falls through when `p` fails, jumps to `on_true` otherwise.
  void jump_if_true(const Predicate &p, int on_true) {
    switch (p.kind) {
      case Predicate::Kind::True:
        ops_.push_back(make_op(Opcode::Goto));
        fixups_.emplace_back(ops_.size() - 1, on_true);
        return;
      case Predicate::Kind::Atom: emit_compare(p.atom, cmp_opcode(p.atom.op), on_true); return;
      case Predicate::Kind::Or:
        for (const auto &c : p.children) jump_if_true(c, on_true);
        return;
      case Predicate::Kind::And: {
        int on_false = new_label();
        for (std::size_t i = 0; i + 1 < p.children.size(); ++i) jump_if_false(p.children[i], on_false);
        jump_if_true(p.children.back(), on_true);
        place(on_false);
        return;
      }
    }
  }

  void resolve() {
    for (auto [at, label] : fixups_) ops_[at].p2 = labels_[static_cast<std::size_t>(label)];
  }

 private:
  // Jumps when reg[p3] OP reg[p1], i.e. column OP literal.
  void emit_compare(const Atom &a, Opcode op, int target) {
    ops_.push_back(make_op(op, literal_regs_.at(a.literal), 0, column_regs_.at(a.column)));
    fixups_.emplace_back(ops_.size() - 1, target);
  }

  std::vector<Op> &ops_;
  const std::map<std::string, std::int32_t> &column_regs_;
  const std::map<std::int64_t, std::int32_t> &literal_regs_;
  std::vector<std::int32_t> labels_;
  std::vector<std::pair<std::size_t, int>> fixups_;
};

void collect_atoms(const Predicate &p, std::vector<const Atom *> &out) {
  if (p.kind == Predicate::Kind::Atom) out.push_back(&p.atom);
  for (const auto &c : p.children) collect_atoms(c, out);
}

}  // namespace

PlannedQuery plan_query(const QueryAst &ast, const TableSchema &schema, std::int32_t table_id) {
  if (!schema.name.empty() && schema.name != ast.table) {
    throw PlanError(PlanError::Kind::UnknownTable, "no such table: " + ast.table);
  }
  auto column_index = [&schema](const std::string &name) {
    auto idx = schema.column_index(name);
    if (!idx) throw PlanError(PlanError::Kind::UnknownColumn, "no such column: " + name);
    return *idx;
  };

  std::vector<const Atom *> atoms;
  collect_atoms(ast.predicate, atoms);

  // Registers: columns from 1 (selected column first), then one per distinct
  // literal, then the result register.
  std::vector<std::string> columns{ast.column};
  for (const Atom *a : atoms) {
    if (std::find(columns.begin(), columns.end(), a->column) == columns.end()) columns.push_back(a->column);
  }
  std::map<std::string, std::int32_t> column_regs;
  std::int32_t next_reg = 1;
  for (const auto &c : columns) {
    column_index(c);
    column_regs[c] = next_reg++;
  }
  std::vector<std::int64_t> literals;
  std::map<std::int64_t, std::int32_t> literal_regs;
  for (const Atom *a : atoms) {
    if (a->literal < std::numeric_limits<std::int32_t>::min() || a->literal > std::numeric_limits<std::int32_t>::max()) {
      throw PlanError(PlanError::Kind::LiteralOutOfRange,
                      "literal " + std::to_string(a->literal) + " does not fit an Integer operand (32-bit)");
    }
    if (literal_regs.emplace(a->literal, next_reg).second) {
      literals.push_back(a->literal);
      ++next_reg;
    }
  }
  const std::int32_t out_reg = next_reg;

  PlanLayout L;
  std::vector<Op> ops;
  L.init = 0;
  ops.push_back(make_op(Opcode::Init));
  L.open_read = 1;
  ops.push_back(make_op(Opcode::OpenRead, kCursor, table_id));
  L.rewind = 2;
  ops.push_back(make_op(Opcode::Rewind, kCursor));
  L.loop_head = 3;
  for (const auto &c : columns) ops.push_back(make_op(Opcode::Column, kCursor, column_index(c), column_regs[c]));

  LoopEmitter emitter(ops, column_regs, literal_regs);
  int skip_row = emitter.new_label();
  L.compare_begin = static_cast<std::int32_t>(ops.size());
  emitter.jump_if_false(ast.predicate, skip_row);
  L.compare_end = static_cast<std::int32_t>(ops.size());
  L.copy = static_cast<std::int32_t>(ops.size());
  ops.push_back(make_op(Opcode::Copy, column_regs[ast.column], out_reg));
  L.result_row = static_cast<std::int32_t>(ops.size());
  ops.push_back(make_op(Opcode::ResultRow, out_reg, 1));
  emitter.place(skip_row);
  L.next = static_cast<std::int32_t>(ops.size());
  ops.push_back(make_op(Opcode::Next, kCursor, L.loop_head));
  L.halt = static_cast<std::int32_t>(ops.size());
  ops.push_back(make_op(Opcode::Halt));
  L.transaction = static_cast<std::int32_t>(ops.size());
  ops.push_back(make_op(Opcode::Transaction));
  L.constants_begin = static_cast<std::int32_t>(ops.size());
  for (std::int64_t lit : literals) {
    ops.push_back(make_op(Opcode::Integer, static_cast<std::int32_t>(lit), literal_regs[lit]));
  }
  L.constants_end = static_cast<std::int32_t>(ops.size());
  L.goto_open = static_cast<std::int32_t>(ops.size());
  ops.push_back(make_op(Opcode::Goto, 0, L.open_read));
  emitter.resolve();
  ops[static_cast<std::size_t>(L.init)].p2 = L.transaction;
  ops[static_cast<std::size_t>(L.rewind)].p2 = L.halt;

  PlannedQuery out;
  out.program = make_program(std::move(ops));
  out.program.main_loop_head = L.loop_head;
  out.layout = L;
  return out;
}

Program plan(const QueryAst &ast, const TableSchema &schema, std::int32_t table_id) {
  return plan_query(ast, schema, table_id).program;
}

Program plan(const QueryAst &ast, const Database &db) {
  auto id = db.find_table(ast.table);
  if (!id) throw PlanError(PlanError::Kind::UnknownTable, "no such table: " + ast.table);
  return plan(ast, db.table(*id).schema(), *id);
}

Program compile_query(std::string_view text, const Database &db) {
  Program p = plan(parse_query(text), db);
  p.source_text = std::string(text);
  return p;
}

std::string gen_bench_query(int k, std::optional<std::int64_t> bound) {
  std::string q = "SELECT i FROM test WHERE ";
  if (k <= 0) {
    q += "(i<0 AND i>1)";
  } else {
    for (int j = 0; j < k; ++j) {
      std::int64_t a = 100LL * j + 1;
      if (j) q += " OR ";
      q += "(i<" + std::to_string(a) + " AND i>" + std::to_string(a + 5) + ")";
    }
  }
  if (bound) q += " OR (i<" + std::to_string(*bound) + " AND i>-1)";
  return q;
}

int count_loop_ops(const Program &program) {
  if (!program.main_loop_head) throw PlanError(PlanError::Kind::NoLoop, "program has no main loop");
  std::int32_t head = *program.main_loop_head;
  for (std::size_t pc = static_cast<std::size_t>(head); pc < program.ops.size(); ++pc) {
    const Op &op = program.ops[pc];
    if (opcode_of(op) == Opcode::Next && op.p2 == head) return static_cast<int>(pc) - head + 1;
  }
  throw PlanError(PlanError::Kind::NoLoop, "no Next jumps back to the loop head");
}

}  // namespace qjit

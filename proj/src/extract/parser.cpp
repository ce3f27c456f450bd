#include "qjit/extract/parser.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace qjit::extract {
namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

// Longest first.
constexpr std::array<std::string_view, 21> kMultiPunct = {
    "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^="};
constexpr std::string_view kSinglePunct = "{}()[];,:?.+-*/%<>=!&|^~";

// Annotations stripped during preprocessing.
const std::set<std::string, std::less<>> kStrippedAnnotations = {"QJ_NOINLINE", "SQLITE_NOINLINE"};

[[noreturn]] void subset_violation(const std::string &what, SourcePos pos) {
  throw ExtractError(ExtractError::Kind::SubsetViolation, what, pos);
}

[[noreturn]] void parse_error(const std::string &what, SourcePos pos) {
  throw ExtractError(ExtractError::Kind::Parse, what, pos);
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool line_start = true;
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == '\n') {
        advance();
        line_start = true;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        SourcePos start = pos();
        advance();
        advance();
        while (i_ < text_.size() && !(text_[i_] == '*' && peek(1) == '/')) advance();
        if (i_ >= text_.size()) parse_error("unterminated comment", start);
        advance();
        advance();
        continue;
      }
      if (c == '#') {
        if (!line_start) parse_error("stray '#'", pos());
        preprocessor_line();
        continue;
      }
      line_start = false;
      SourcePos start = pos();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (i_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
          word += text_[i_];
          advance();
        }
        if (kStrippedAnnotations.contains(word)) continue;
        out.push_back({Tok::Ident, std::move(word), start});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string num;
        while (i_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i_])))) {
          num += text_[i_];
          advance();
        }
        if (i_ < text_.size() && text_[i_] == '.') subset_violation("floating-point literal", start);
        out.push_back({Tok::Number, std::move(num), start});
        continue;
      }
      if (c == '"' || c == '\'') subset_violation("string or character literal", start);
      bool matched = false;
      for (std::string_view p : kMultiPunct) {
        if (text_.substr(i_, p.size()) == p) {
          for (std::size_t k = 0; k < p.size(); ++k) advance();
          out.push_back({Tok::Punct, std::string(p), start});
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (kSinglePunct.find(c) != std::string_view::npos) {
        advance();
        out.push_back({Tok::Punct, std::string(1, c), start});
        continue;
      }
      parse_error(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({Tok::End, "", pos()});
    return out;
  }

 private:
  char peek(std::size_t ahead) const { return i_ + ahead < text_.size() ? text_[i_ + ahead] : '\0'; }

  SourcePos pos() const { return {line_, col_}; }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void preprocessor_line() {
    SourcePos start = pos();
    std::size_t end = text_.find('\n', i_);
    std::string_view line = text_.substr(i_, end == std::string_view::npos ? std::string_view::npos : end - i_);
    std::size_t k = 1;
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (line.substr(k, 7) != "include") subset_violation("preprocessor directive other than #include", start);
    while (i_ < text_.size() && text_[i_] != '\n') advance();
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SemanticsAst parse_file() {
    SemanticsAst ast;
    if (at_end()) parse_error("empty semantics source", cur().pos);

    // Function header: words and '*' up to `name (`.
    while (!(cur().kind == Tok::Ident && peek(1).text == "(")) {
      if (at_end()) parse_error("expected function definition", cur().pos);
      if (cur().kind != Tok::Ident && cur().text != "*") parse_error("expected function definition", cur().pos);
      next();
    }
    ast.function_name = next().text;
    expect("(");
    int depth = 1;
    while (depth > 0) {
      if (at_end()) parse_error("unterminated parameter list", cur().pos);
      if (cur().text == "(") ++depth;
      if (cur().text == ")") --depth;
      next();
    }
    expect("{");

    while (!(cur().kind == Tok::Ident && cur().text == "switch")) {
      if (at_end() || cur().text == "}") parse_error("missing dispatch construct", cur().pos);
      ast.declarations.push_back(parse_declaration());
    }
    parse_dispatch(ast);

    if (cur().kind == Tok::Ident && cur().text == "switch") subset_violation("more than one dispatch construct", cur().pos);
    if (cur().text != "}") subset_violation("statements after the dispatch construct", cur().pos);
    next();
    if (!at_end()) parse_error("trailing tokens after function body", cur().pos);
    return ast;
  }

 private:
  const Token &cur() const { return toks_[i_]; }
  const Token &peek(std::size_t ahead) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return cur().kind == Tok::End; }
  const Token &next() {
    const Token &t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool accept(std::string_view p) {
    if (cur().kind != Tok::Ident && cur().kind != Tok::End && cur().text == p) {
      next();
      return true;
    }
    return false;
  }
  bool is_keyword(std::string_view kw) const { return cur().kind == Tok::Ident && cur().text == kw; }
  void expect(std::string_view p) {
    if (cur().text != p) parse_error("expected '" + std::string(p) + "' but found '" + cur().text + "'", cur().pos);
    next();
  }
  std::string expect_ident() {
    if (cur().kind != Tok::Ident) parse_error("expected identifier but found '" + cur().text + "'", cur().pos);
    return next().text;
  }

  StmtPtr parse_declaration() {
    SourcePos start = cur().pos;
    std::vector<std::string> words;
    std::string text;
    // type words, then declarators separated by commas
    while (cur().text != ";") {
      if (at_end()) parse_error("unterminated declaration", start);
      if (cur().text == "=") subset_violation("initialized declaration", cur().pos);
      if (cur().text == "(" || cur().text == "[") subset_violation("complex declarator", cur().pos);
      const Token &t = next();
      if (t.kind == Tok::Ident) words.push_back(t.text);
      if (!text.empty() && t.text != "," && t.text != "*" && text.back() != '*') text += ' ';
      if (t.text == "*" && !text.empty() && text.back() != '*' && text.back() != ' ') text += ' ';
      text += t.text;
      if (t.text == ",") text += ' ';
    }
    next();
    if (words.size() < 2) parse_error("expected declaration", start);
    // Every word but the declarator names counts as a type word.
    std::size_t names = 1;
    for (std::size_t k = 0; k < text.size(); ++k) {
      if (text[k] == ',') ++names;
    }
    for (std::size_t k = 0; k + names < words.size(); ++k) type_words_.insert(words[k]);
    auto s = make_stmt(StmtKind::Decl, start);
    s->text = std::move(text);
    return s;
  }

  void parse_dispatch(SemanticsAst &ast) {
    ast.dispatch_pos = cur().pos;
    next();  // switch
    expect("(");
    ast.dispatch_operand = parse_expr();
    expect(")");
    const Expr &op = *ast.dispatch_operand;
    bool is_opcode = op.kind == ExprKind::Member && op.arrow && op.text == "opcode" &&
                     op.kids[0]->kind == ExprKind::Ident && op.kids[0]->text == "pOp";
    if (!is_opcode) subset_violation("dispatch must switch on pOp->opcode", ast.dispatch_pos);
    expect("{");
    while (!accept("}")) {
      if (at_end()) parse_error("unterminated dispatch construct", ast.dispatch_pos);
      if (is_keyword("default")) subset_violation("default label in dispatch construct", cur().pos);
      if (!is_keyword("case")) parse_error("expected case label", cur().pos);
      CaseClause clause;
      clause.begin = cur().pos;
      while (is_keyword("case")) {
        next();
        SourcePos lp = cur().pos;
        std::string label = expect_ident();
        if (!label.starts_with("OP_")) parse_error("case label must be an OP_ constant", lp);
        expect(":");
        clause.labels.push_back(label.substr(3));
        clause.label_pos.push_back(lp);
      }
      while (!is_keyword("case") && cur().text != "}") {
        if (at_end()) parse_error("unterminated case block", clause.begin);
        if (is_keyword("default")) subset_violation("default label in dispatch construct", cur().pos);
        clause.stmts.push_back(parse_stmt());
      }
      clause.end = cur().pos;
      if (clause.stmts.empty()) parse_error("case block has no body", clause.begin);
      if (!terminates(*clause.stmts.back())) subset_violation("case block falls through", clause.end);
      ast.clauses.push_back(std::move(clause));
    }
  }

  static bool terminates(const Stmt &s) {
    switch (s.kind) {
      case StmtKind::Break:
      case StmtKind::Goto:
      case StmtKind::Return:
        return true;
      case StmtKind::Compound:
        return !s.body.empty() && terminates(*s.body.back());
      case StmtKind::Label:
        return terminates(*s.body[0]);
      case StmtKind::If:
        return s.body.size() == 2 && terminates(*s.body[0]) && terminates(*s.body[1]);
      default:
        return false;
    }
  }

  StmtPtr parse_stmt() {
    SourcePos p = cur().pos;
    if (cur().kind == Tok::Punct) {
      if (accept("{")) {
        auto block = make_stmt(StmtKind::Compound, p);
        while (!accept("}")) {
          if (at_end()) parse_error("unterminated block", p);
          if (is_keyword("case") || is_keyword("default")) subset_violation("case label inside a nested block", cur().pos);
          block->body.push_back(parse_stmt());
        }
        return block;
      }
      if (accept(";")) return make_stmt(StmtKind::Empty, p);
    }
    if (cur().kind == Tok::Ident) {
      const std::string &w = cur().text;
      if (w == "switch") subset_violation("nested dispatch construct", p);
      if (w == "while" || w == "for" || w == "do") subset_violation("loop inside case block", p);
      if (w == "return") subset_violation("return inside case block", p);
      if (w == "continue") subset_violation("continue inside case block", p);
      if (type_words_.contains(w) || kBuiltinTypes.contains(w)) subset_violation("declaration inside case block", p);
      if (w == "if") {
        next();
        expect("(");
        auto s = make_stmt(StmtKind::If, p);
        s->expr = parse_expr();
        expect(")");
        s->body.push_back(parse_stmt());
        if (is_keyword("else")) {
          next();
          s->body.push_back(parse_stmt());
        }
        return s;
      }
      if (w == "goto") {
        next();
        auto s = make_goto(expect_ident(), p);
        expect(";");
        return s;
      }
      if (w == "break") {
        next();
        expect(";");
        return make_stmt(StmtKind::Break, p);
      }
      if (peek(1).text == ":" && peek(1).kind == Tok::Punct) {
        std::string name = next().text;
        next();
        if (cur().text == "}") parse_error("label at end of block", p);
        return make_label(std::move(name), parse_stmt(), p);
      }
    }
    auto s = make_expr_stmt(parse_expr(), p);
    expect(";");
    return s;
  }

  // Expressions, lowest precedence first.
  ExprPtr parse_expr() { return parse_assign(); }

  ExprPtr parse_assign() {
    ExprPtr lhs = parse_ternary();
    static const std::set<std::string, std::less<>> kAssign = {"=",  "+=", "-=", "*=", "/=", "%=",
                                                               "&=", "|=", "^=", "<<=", ">>="};
    if (cur().kind == Tok::Punct && kAssign.contains(cur().text)) {
      const Token &op = next();
      std::vector<ExprPtr> kids;
      kids.push_back(std::move(lhs));
      kids.push_back(parse_assign());
      return make_expr(ExprKind::Binary, op.text, std::move(kids), op.pos);
    }
    return lhs;
  }

  ExprPtr parse_ternary() {
    ExprPtr cond = parse_binary(0);
    if (cur().kind == Tok::Punct && cur().text == "?") {
      SourcePos p = next().pos;
      std::vector<ExprPtr> kids;
      kids.push_back(std::move(cond));
      kids.push_back(parse_expr());
      expect(":");
      kids.push_back(parse_ternary());
      return make_expr(ExprKind::Ternary, "?:", std::move(kids), p);
    }
    return cond;
  }

  static int precedence(const Token &t) {
    if (t.kind != Tok::Punct) return -1;
    static const std::array<std::pair<std::string_view, int>, 18> kTable = {{
        {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5}, {"==", 6}, {"!=", 6},
        {"<", 7},  {">", 7},  {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8}, {"+", 9},
        {"-", 9},  {"*", 10}, {"/", 10}, {"%", 10},
    }};
    for (const auto &[op, prec] : kTable) {
      if (t.text == op) return prec;
    }
    return -1;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      int prec = precedence(cur());
      if (prec < 0 || prec < min_prec) break;
      const Token &op = next();
      ExprPtr rhs = parse_binary(prec + 1);
      std::vector<ExprPtr> kids;
      kids.push_back(std::move(lhs));
      kids.push_back(std::move(rhs));
      lhs = make_expr(ExprKind::Binary, op.text, std::move(kids), op.pos);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    static const std::set<std::string, std::less<>> kPrefix = {"!", "-", "+", "~", "&", "*", "++", "--"};
    if (cur().kind == Tok::Punct && kPrefix.contains(cur().text)) {
      const Token &op = next();
      std::vector<ExprPtr> kids;
      kids.push_back(parse_unary());
      return make_expr(ExprKind::Prefix, op.text, std::move(kids), op.pos);
    }
    if (is_keyword("sizeof")) subset_violation("sizeof", cur().pos);
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      SourcePos p = cur().pos;
      if (cur().kind != Tok::Punct) break;
      if (accept("[")) {
        std::vector<ExprPtr> kids;
        kids.push_back(std::move(e));
        kids.push_back(parse_expr());
        expect("]");
        e = make_expr(ExprKind::Index, "[]", std::move(kids), p);
      } else if (accept("(")) {
        std::vector<ExprPtr> kids;
        kids.push_back(std::move(e));
        if (!accept(")")) {
          do {
            kids.push_back(parse_assign());
          } while (accept(","));
          expect(")");
        }
        e = make_expr(ExprKind::Call, "()", std::move(kids), p);
      } else if (cur().text == "->" || cur().text == ".") {
        bool arrow = next().text == "->";
        std::vector<ExprPtr> kids;
        kids.push_back(std::move(e));
        e = make_expr(ExprKind::Member, expect_ident(), std::move(kids), p);
        e->arrow = arrow;
      } else if (cur().text == "++" || cur().text == "--") {
        std::vector<ExprPtr> kids;
        kids.push_back(std::move(e));
        e = make_expr(ExprKind::Postfix, next().text, std::move(kids), p);
      } else {
        break;
      }
    }
    return e;
  }

  ExprPtr parse_primary() {
    SourcePos p = cur().pos;
    if (cur().kind == Tok::Ident) {
      if (type_words_.contains(cur().text) || kBuiltinTypes.contains(cur().text)) {
        subset_violation("type name in expression", p);
      }
      return make_ident(next().text, p);
    }
    if (cur().kind == Tok::Number) return make_expr(ExprKind::IntLit, next().text, {}, p);
    if (accept("(")) {
      if (cur().kind == Tok::Ident && (type_words_.contains(cur().text) || kBuiltinTypes.contains(cur().text))) {
        subset_violation("cast", p);
      }
      std::vector<ExprPtr> kids;
      kids.push_back(parse_expr());
      expect(")");
      return make_expr(ExprKind::Paren, "()", std::move(kids), p);
    }
    parse_error("expected expression but found '" + cur().text + "'", p);
  }

  inline static const std::set<std::string, std::less<>> kBuiltinTypes = {
      "int", "unsigned", "signed", "long", "short", "char", "double", "float", "const", "void", "struct", "static"};

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::set<std::string, std::less<>> type_words_;
};

}  // namespace

SemanticsAst parse_semantics_text(std::string_view text, std::string source_name) {
  Parser parser(Lexer(text).run());
  SemanticsAst ast = parser.parse_file();
  ast.source_name = std::move(source_name);
  ast.source_hash = fnv1a64(text);
  return ast;
}

SemanticsAst parse_semantics_source(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExtractError(ExtractError::Kind::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_semantics_text(buf.str(), path.filename().string());
}

}  // namespace qjit::extract

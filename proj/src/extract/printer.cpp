#include "qjit/extract/printer.hpp"

#include <cctype>

namespace qjit::extract {
namespace {

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

// Compound statement opened on the current last line ("... {").
void print_braced(const Stmt &compound, int indent, std::vector<std::string> &lines) {
  lines.back() += "{";
  for (const auto &child : compound.body) print_stmt(*child, indent + 1, lines);
  lines.push_back(pad(indent) + "}");
}

void print_branch(const Stmt &s, int indent, std::vector<std::string> &lines) {
  if (s.kind == StmtKind::Compound) {
    lines.back() += " ";
    print_braced(s, indent, lines);
  } else {
    print_stmt(s, indent + 1, lines);
  }
}

}  // namespace

std::string print_expr(const Expr &e) {
  switch (e.kind) {
    case ExprKind::Ident:
    case ExprKind::IntLit:
      return e.text;
    case ExprKind::Paren:
      return "(" + print_expr(*e.kids[0]) + ")";
    case ExprKind::Prefix: {
      std::string operand = print_expr(*e.kids[0]);
      // `- -x` and `& &x` must not fuse into a different token.
      bool fuse = !operand.empty() && !e.text.empty() && operand.front() == e.text.back();
      return e.text + (fuse ? " " : "") + operand;
    }
    case ExprKind::Postfix:
      return print_expr(*e.kids[0]) + e.text;
    case ExprKind::Binary:
      return print_expr(*e.kids[0]) + " " + e.text + " " + print_expr(*e.kids[1]);
    case ExprKind::Ternary:
      return print_expr(*e.kids[0]) + " ? " + print_expr(*e.kids[1]) + " : " + print_expr(*e.kids[2]);
    case ExprKind::Call: {
      std::string out = print_expr(*e.kids[0]) + "(";
      for (std::size_t i = 1; i < e.kids.size(); ++i) {
        if (i > 1) out += ", ";
        out += print_expr(*e.kids[i]);
      }
      return out + ")";
    }
    case ExprKind::Index:
      return print_expr(*e.kids[0]) + "[" + print_expr(*e.kids[1]) + "]";
    case ExprKind::Member:
      return print_expr(*e.kids[0]) + (e.arrow ? "->" : ".") + e.text;
  }
  return {};
}

void print_stmt(const Stmt &s, int indent, std::vector<std::string> &lines) {
  switch (s.kind) {
    case StmtKind::Compound:
      lines.push_back(pad(indent));
      print_braced(s, indent, lines);
      return;
    case StmtKind::If: {
      lines.push_back(pad(indent) + "if (" + print_expr(*s.expr) + ")");
      print_branch(*s.body[0], indent, lines);
      if (s.body.size() > 1) {
        const Stmt &alt = *s.body[1];
        if (alt.kind == StmtKind::If) {
          // else-if chains stay flat
          std::vector<std::string> nested;
          print_stmt(alt, indent, nested);
          lines.back() += " else " + nested.front().substr(pad(indent).size());
          for (std::size_t i = 1; i < nested.size(); ++i) lines.push_back(std::move(nested[i]));
        } else if (alt.kind == StmtKind::Compound) {
          lines.back() += " else ";
          print_braced(alt, indent, lines);
        } else {
          lines.back() += " else";
          print_stmt(alt, indent + 1, lines);
        }
      }
      return;
    }
    case StmtKind::ExprStmt:
      lines.push_back(pad(indent) + print_expr(*s.expr) + ";");
      return;
    case StmtKind::Goto:
      lines.push_back(pad(indent) + "goto " + s.text + ";");
      return;
    case StmtKind::Label: {
      const Stmt &inner = *s.body[0];
      if (inner.kind == StmtKind::Compound) {
        lines.push_back(pad(indent) + s.text + ": ");
        print_braced(inner, indent, lines);
      } else {
        lines.push_back(pad(indent > 0 ? indent - 1 : 0) + s.text + ":");
        print_stmt(inner, indent, lines);
      }
      return;
    }
    case StmtKind::Break:
      lines.push_back(pad(indent) + "break;");
      return;
    case StmtKind::Return:
      lines.push_back(pad(indent) + "return " + print_expr(*s.expr) + ";");
      return;
    case StmtKind::Empty:
      lines.push_back(pad(indent) + ";");
      return;
    case StmtKind::Decl:
      lines.push_back(pad(indent) + s.text + ";");
      return;
  }
}

std::string print_stmt(const Stmt &s, int indent) {
  std::vector<std::string> lines;
  print_stmt(s, indent, lines);
  std::string out;
  for (const auto &l : lines) out += l + "\n";
  return out;
}

std::string join_macro_lines(const std::vector<std::string> &lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += lines[i];
    out += i + 1 < lines.size() ? " \\\n" : "\n";
  }
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string joined;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size() && text[i + 1] == '\n') {
      joined += ' ';
      ++i;
      continue;
    }
    joined += text[i];
  }
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  std::string out;
  bool pending_space = false;
  for (char c : joined) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    // A space only survives between two word characters.
    if (pending_space && is_word(out.back()) && is_word(c)) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace qjit::extract

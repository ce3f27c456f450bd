#include "qjit/extract/transform.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <set>
#include <stdexcept>

#include "qjit/extract/printer.hpp"

namespace qjit::extract {
namespace {

const std::set<std::string, std::less<>> kReservedNames = {"pos", "next", "P1", "P2", "P3", "OPC"};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void walk_stmts(const Stmt &s, const std::function<void(const Stmt &)> &fn) {
  fn(s);
  for (const auto &b : s.body) walk_stmts(*b, fn);
}

void walk_exprs(const Expr &e, const std::function<void(const Expr &)> &fn) {
  fn(e);
  for (const auto &k : e.kids) walk_exprs(*k, fn);
}

ExprPtr outcome_expr(std::string_view kind, ExprPtr pc, std::string_view code) {
  std::vector<ExprPtr> args;
  args.push_back(make_ident("qj_outcome_make"));
  args.push_back(make_ident(std::string(kind)));
  args.push_back(std::move(pc));
  args.push_back(make_ident(std::string(code)));
  return make_expr(ExprKind::Call, "()", std::move(args));
}

ExprPtr binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
  std::vector<ExprPtr> kids;
  kids.push_back(std::move(lhs));
  kids.push_back(std::move(rhs));
  return make_expr(ExprKind::Binary, std::move(op), std::move(kids));
}

class BlockRewriter {
 public:
  explicit BlockRewriter(std::set<std::string> local_labels) : locals_(std::move(local_labels)) {}

  unsigned exit_kinds() const { return kinds_; }

  void rewrite(StmtPtr &s) {
    switch (s->kind) {
      case StmtKind::Goto:
        rewrite_goto(s);
        return;
      case StmtKind::Label:
        // R5: local labels are suffixed with the instruction position.
        s->text = localize(s->text);
        rewrite(s->body[0]);
        return;
      case StmtKind::Break:
        // R6: leaving the block continues at the next template in sequence.
        s = make_goto("next", s->pos);
        kinds_ |= kExitFallthroughNext;
        return;
      default:
        break;
    }
    if (s->expr) rewrite_expr(s->expr);
    for (auto &b : s->body) rewrite(b);
  }

 private:
  static std::string localize(const std::string &label) { return label + "_##pos"; }

  void rewrite_goto(StmtPtr &s) {
    const std::string &target = s->text;
    SourcePos p = s->pos;
    if (locals_.contains(target)) {
      s->text = localize(target);
    } else if (target == kJumpToP2Label) {
      // R4: jump to the entry label of the template instantiated at P2.
      s->text = "L##P2";
      kinds_ |= kExitJumpToP2;
    } else if (target == kErrorLabel) {
      // R3: error exits become returns; the interpreter releases resources.
      s = make_return(outcome_expr("QJ_OUT_ERROR", make_ident("pos"), "rc"), p);
      kinds_ |= kExitError;
    } else if (target == kHaltLabel) {
      s = make_return(outcome_expr("QJ_OUT_HALT", make_ident("pos"), "QJ_OK"), p);
      kinds_ |= kExitHalt;
    } else if (target == kRowLabel) {
      s = make_return(outcome_expr("QJ_OUT_ROW", binary("+", make_ident("pos"), make_expr(ExprKind::IntLit, "1", {})), "QJ_OK"), p);
      kinds_ |= kExitRow;
    } else {
      throw ExtractError(ExtractError::Kind::UnrewritableJump, "cannot classify jump target '" + target + "'", p);
    }
  }

  // R7: operand and opcode reads become macro parameters.
  static void rewrite_expr(ExprPtr &e) {
    if (e->kind == ExprKind::Member && e->arrow && e->kids[0]->kind == ExprKind::Ident && e->kids[0]->text == "pOp") {
      static const std::array<std::pair<std::string_view, std::string_view>, 4> kOperands = {
          {{"p1", "P1"}, {"p2", "P2"}, {"p3", "P3"}, {"opcode", "OPC"}}};
      for (const auto &[field, param] : kOperands) {
        if (e->text == field) {
          e = make_ident(std::string(param), e->pos);
          return;
        }
      }
    }
    for (auto &k : e->kids) rewrite_expr(k);
  }

  std::set<std::string> locals_;
  unsigned kinds_ = 0;
};

void check_reserved_names(const Stmt &body) {
  walk_stmts(body, [](const Stmt &s) {
    if ((s.kind == StmtKind::Label) && kReservedNames.contains(s.text)) {
      throw ExtractError(ExtractError::Kind::SubsetViolation, "label name '" + s.text + "' is reserved", s.pos);
    }
    if (!s.expr) return;
    walk_exprs(*s.expr, [](const Expr &e) {
      if ((e.kind == ExprKind::Ident || e.kind == ExprKind::Member) && kReservedNames.contains(e.text)) {
        throw ExtractError(ExtractError::Kind::SubsetViolation, "name '" + e.text + "' is reserved for template parameters", e.pos);
      }
    });
  });
}

// Finds `name = &aMem[E]` among the top-level statements and returns E.
const Expr *register_operand_of(const Stmt &compound, std::string_view name) {
  for (const auto &s : compound.body) {
    if (s->kind != StmtKind::ExprStmt) continue;
    const Expr &e = *s->expr;
    if (e.kind != ExprKind::Binary || e.text != "=") continue;
    if (e.kids[0]->kind != ExprKind::Ident || e.kids[0]->text != name) continue;
    const Expr &rhs = *e.kids[1];
    if (rhs.kind != ExprKind::Prefix || rhs.text != "&") continue;
    const Expr &idx = *rhs.kids[0];
    if (idx.kind == ExprKind::Index && idx.kids[0]->kind == ExprKind::Ident && idx.kids[0]->text == "aMem") {
      return idx.kids[1].get();
    }
  }
  return nullptr;
}

Expr *find_call(Expr &e, std::string_view callee) {
  if (e.kind == ExprKind::Call && e.kids[0]->kind == ExprKind::Ident && e.kids[0]->text == callee) return &e;
  for (auto &k : e.kids) {
    if (Expr *hit = find_call(*k, callee)) return hit;
  }
  return nullptr;
}

Expr *find_call(Stmt &s, std::string_view callee) {
  if (s.expr) {
    if (Expr *hit = find_call(*s.expr, callee)) return hit;
  }
  for (auto &b : s.body) {
    if (Expr *hit = find_call(*b, callee)) return hit;
  }
  return nullptr;
}

}  // namespace

std::string CaseBlock::group_name() const { return lower(opcode_name(opcodes.front())); }

bool CaseBlock::serves(Opcode op) const { return std::find(opcodes.begin(), opcodes.end(), op) != opcodes.end(); }

std::string exit_kinds_to_string(unsigned kinds) {
  static const std::array<std::pair<unsigned, std::string_view>, 6> kNames = {{
      {kExitFallthroughNext, "fallthrough_next"},
      {kExitJumpToP2, "jump_to_p2"},
      {kExitError, "error_return"},
      {kExitHalt, "halt_return"},
      {kExitRow, "row_return"},
      {kExitDeopt, "deopt_return"},
  }};
  std::string out;
  for (const auto &[bit, name] : kNames) {
    if ((kinds & bit) == 0) continue;
    if (!out.empty()) out += ",";
    out += name;
  }
  return out;
}

std::vector<CaseBlock> extract_case_blocks(const SemanticsAst &ast) {
  std::vector<CaseBlock> blocks;
  std::set<Opcode> seen;
  for (const CaseClause &clause : ast.clauses) {
    CaseBlock block;
    for (std::size_t i = 0; i < clause.labels.size(); ++i) {
      auto op = opcode_from_name(clause.labels[i]);
      if (!op) throw ExtractError(ExtractError::Kind::Parse, "unknown opcode OP_" + clause.labels[i], clause.label_pos[i]);
      if (!seen.insert(*op).second) {
        throw ExtractError(ExtractError::Kind::SubsetViolation, "duplicate case OP_" + clause.labels[i], clause.label_pos[i]);
      }
      block.opcodes.push_back(*op);
    }
    if (clause.stmts.size() == 1 && clause.stmts[0]->kind == StmtKind::Compound) {
      block.body = clause.stmts[0]->clone();
    } else {
      std::vector<StmtPtr> children;
      for (const auto &s : clause.stmts) children.push_back(s->clone());
      block.body = make_compound(std::move(children), clause.begin);
    }
    block.begin = clause.begin;
    block.end = clause.end;
    blocks.push_back(std::move(block));
  }
  std::string missing;
  for (Opcode op : kAllOpcodes) {
    if (!seen.contains(op)) missing += (missing.empty() ? "" : ", ") + std::string(opcode_name(op));
  }
  if (!missing.empty()) throw ExtractError(ExtractError::Kind::MissingOpcode, "no case block for: " + missing);
  return blocks;
}

Template transform_block(const CaseBlock &block, Opcode opcode) {
  if (!block.serves(opcode)) {
    throw std::invalid_argument("case block does not implement " + std::string(opcode_name(opcode)));
  }
  check_reserved_names(*block.body);

  std::set<std::string> local_labels;
  walk_stmts(*block.body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Label) local_labels.insert(s.text);
  });

  StmtPtr body = block.body->clone();
  BlockRewriter rewriter(std::move(local_labels));
  for (auto &s : body->body) rewriter.rewrite(s);

  // R2: rebind the current operation to the instruction at pos.
  std::vector<ExprPtr> index_kids;
  index_kids.push_back(make_ident("aOp"));
  index_kids.push_back(make_ident("pos"));
  std::vector<ExprPtr> addr_kids;
  addr_kids.push_back(make_expr(ExprKind::Index, "[]", std::move(index_kids)));
  body->body.insert(body->body.begin(),
                    make_expr_stmt(binary("=", make_ident("pOp"), make_expr(ExprKind::Prefix, "&", std::move(addr_kids)))));

  Template t;
  t.opcode = opcode;
  t.group = block.group_name();
  t.macro_name = upper(opcode_name(opcode)) + "_TEMPL";
  t.parameters = kTemplateParameters;
  // R1: the entry label is a function of pos alone.
  t.body = make_label("L##pos", std::move(body));
  t.exit_kinds = rewriter.exit_kinds();
  return t;
}

std::vector<Template> specialize_comparison_templates(std::vector<Template> templates) {
  std::vector<Template> variants;
  for (const Template &t : templates) {
    if (!is_comparison(t.opcode) || t.int_specialized) continue;
    StmtPtr label = t.body->clone();
    Stmt &compound = *label->body[0];
    Expr *call = find_call(compound, "qj_mem_compare");
    if (call == nullptr || call->kids.size() != 3) continue;

    // Guard every register that flows into the generic comparison.
    ExprPtr guard;
    bool resolved = true;
    for (std::size_t i = 1; i < call->kids.size(); ++i) {
      const Expr &arg = *call->kids[i];
      const Expr *reg = arg.kind == ExprKind::Ident ? register_operand_of(compound, arg.text) : nullptr;
      if (reg == nullptr) {
        resolved = false;
        break;
      }
      std::vector<ExprPtr> idx;
      idx.push_back(make_ident("aMem"));
      idx.push_back(reg->clone());
      std::vector<ExprPtr> member;
      member.push_back(make_expr(ExprKind::Index, "[]", std::move(idx)));
      ExprPtr type = make_expr(ExprKind::Member, "type", std::move(member));
      ExprPtr test = binary("!=", std::move(type), make_ident("QJ_INT"));
      guard = guard ? binary("||", std::move(guard), std::move(test)) : std::move(test);
    }
    if (!resolved) continue;

    call->kids[0] = make_ident("qj_int_compare");
    auto guard_stmt = make_stmt(StmtKind::If);
    guard_stmt->expr = std::move(guard);
    std::vector<StmtPtr> exit;
    exit.push_back(make_return(outcome_expr("QJ_OUT_DEOPT", make_ident("pos"), "QJ_OK")));
    guard_stmt->body.push_back(make_compound(std::move(exit)));
    // After the op rebinding, before any side effect.
    compound.body.insert(compound.body.begin() + 1, std::move(guard_stmt));

    Template v = t;
    v.body = std::move(label);
    v.macro_name = upper(opcode_name(t.opcode)) + "_INT_TEMPL";
    v.exit_kinds |= kExitDeopt;
    v.int_specialized = true;
    variants.push_back(std::move(v));
  }
  for (auto &v : variants) templates.push_back(std::move(v));
  return templates;
}

std::string render_template(const Template &t) {
  std::string header = "#define " + t.macro_name + "(";
  for (std::size_t i = 0; i < t.parameters.size(); ++i) {
    if (i > 0) header += ", ";
    header += t.parameters[i];
  }
  header += ")";
  std::vector<std::string> lines{header};
  print_stmt(*t.body, 0, lines);
  return join_macro_lines(lines);
}

TemplateSet build_template_set(const SemanticsAst &ast, bool specialize) {
  TemplateSet set;
  set.source_hash = ast.source_hash;
  set.source_name = ast.source_name;
  for (const CaseBlock &block : extract_case_blocks(ast)) {
    for (Opcode op : block.opcodes) set.templates.push_back(transform_block(block, op));
  }
  if (specialize) set.templates = specialize_comparison_templates(std::move(set.templates));
  for (const auto &d : ast.declarations) set.region_locals += d->text + ";\n";
  return set;
}

}  // namespace qjit::extract

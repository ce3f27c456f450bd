#include "qjit/extract/emit.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qjit/extract/parser.hpp"
#include "qjit/extract/printer.hpp"

namespace qjit::extract {
namespace {

namespace fs = std::filesystem;

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%016llxULL", static_cast<unsigned long long>(v));
  return buf;
}

std::string banner(const TemplateSet &set, std::string_view comment_open, std::string_view comment_close) {
  return std::string(comment_open) + " Generated by qjit-templates from " + set.source_name +
         ". Do not edit." + std::string(comment_close) + "\n";
}

// Leaves the file untouched when the content is already current, so repeated
// runs are byte-identical and do not trigger rebuilds.
void write_file(const fs::path &path, const std::string &content) {
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::ostringstream old;
      old << in.rdbuf();
      if (old.str() == content) return;
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExtractError(ExtractError::Kind::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw ExtractError(ExtractError::Kind::Io, "failed writing " + path.string());
}

std::string c_string_literal(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '\n') {
      out += "\\n\"\n    \"";
    } else if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else {
      out += c;
    }
  }
  return out + "\"";
}

void check_coverage(const TemplateSet &set) {
  std::set<Opcode> covered;
  for (const Template &t : set.templates) {
    if (!t.int_specialized) covered.insert(t.opcode);
  }
  std::string missing;
  for (Opcode op : kAllOpcodes) {
    if (!covered.contains(op)) missing += (missing.empty() ? "" : ", ") + std::string(opcode_name(op));
  }
  if (!missing.empty()) throw ExtractError(ExtractError::Kind::MissingOpcode, "no template for: " + missing);
}

std::string template_file_name(const std::string &group) { return "tmpl_" + group + ".inc"; }

std::string render_emitter_table(const TemplateSet &set) {
  std::map<Opcode, const Template *> generic;
  std::map<Opcode, const Template *> specialized;
  for (const Template &t : set.templates) (t.int_specialized ? specialized : generic)[t.opcode] = &t;

  std::string out = banner(set, "//", "");
  out += "// Included by the JIT emitter with qjit::EmitterEntry and\n";
  out += "// qjit::append_template_call in scope.\n\n";
  out += "#define QJ_SEMANTICS_HASH_TEMPLATES " + hex64(set.source_hash) + "\n\n";
  out += "namespace qjit::generated {\n\n";
  out += "inline constexpr std::uint64_t kSemanticsHash = " + hex64(set.source_hash) + ";\n\n";
  out += "inline constexpr const char kRegionLocals[] =\n    " + c_string_literal(set.region_locals) + ";\n\n";
  for (Opcode op : kAllOpcodes) {
    const Template &g = *generic.at(op);
    std::string name(opcode_name(op));
    out += "inline void emit_" + name +
           "(std::string &out, std::int32_t pos, std::string_view next, const qj_op &op, bool int_variant) {\n";
    if (specialized.contains(op)) {
      out += "  append_template_call(out, int_variant ? \"" + specialized.at(op)->macro_name + "\" : \"" +
             g.macro_name + "\", pos, next, op);\n";
    } else {
      out += "  (void)int_variant;\n";
      out += "  append_template_call(out, \"" + g.macro_name + "\", pos, next, op);\n";
    }
    out += "}\n\n";
  }
  out += "inline constexpr EmitterEntry kEmitterEntries[] = {\n";
  for (Opcode op : kAllOpcodes) {
    const Template &g = *generic.at(op);
    std::string name(opcode_name(op));
    std::string int_macro = specialized.contains(op) ? "\"" + specialized.at(op)->macro_name + "\"" : "nullptr";
    char kinds[16];
    std::snprintf(kinds, sizeof kinds, "0x%02xu", g.exit_kinds);
    out += "    {Opcode::" + name + ", \"" + template_file_name(g.group) + "\", \"" + g.macro_name + "\", " +
           int_macro + ", " + kinds + ", true, &emit_" + name + "},\n";
  }
  out += "};\n\n}  // namespace qjit::generated\n";
  return out;
}

void print_clause_labels(const CaseClause &clause, std::vector<std::string> &lines) {
  for (const auto &label : clause.labels) lines.push_back("case OP_" + label + ":");
}

const Stmt &clause_body(const CaseClause &clause, StmtPtr &storage) {
  if (clause.stmts.size() == 1 && clause.stmts[0]->kind == StmtKind::Compound) return *clause.stmts[0];
  std::vector<StmtPtr> children;
  for (const auto &s : clause.stmts) children.push_back(s->clone());
  storage = make_compound(std::move(children));
  return *storage;
}

// Threaded handlers end in a dispatch to the next handler instead of break.
void rewrite_for_threading(StmtPtr &s) {
  if (s->kind == StmtKind::Break) {
    std::vector<ExprPtr> callee;
    callee.push_back(make_ident("QJ_NEXT"));
    s = make_expr_stmt(make_expr(ExprKind::Call, "()", std::move(callee)), s->pos);
    return;
  }
  if (s->kind == StmtKind::Goto && s->text == kJumpToP2Label) {
    std::vector<ExprPtr> callee;
    callee.push_back(make_ident("QJ_JUMP_P2"));
    s = make_expr_stmt(make_expr(ExprKind::Call, "()", std::move(callee)), s->pos);
    return;
  }
  for (auto &b : s->body) rewrite_for_threading(b);
}

std::string handler_label(const CaseClause &clause) {
  std::string name = clause.labels.front();
  for (char &c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return "QJ_H_" + name;
}

std::string render_template_smoke(const TemplateSet &set) {
  std::map<std::string, bool> groups;
  for (const Template &t : set.templates) groups[t.group] = true;
  std::string out = banner(set, "/*", " */");
  out += "/* Instantiates every template once; compiled as part of the build. */\n";
  out += "#include \"qjit/vdbe.h\"\n";
  for (const auto &[group, _] : groups) out += "#include \"" + template_file_name(group) + "\"\n";
  out += "\nqj_outcome qj_template_smoke(qj_vm *vm_in);\n\n";
  out += "qj_outcome qj_template_smoke(qj_vm *vm_in) {\n";
  out += "  QJ_ENV_BIND(vm_in);\n";
  std::istringstream locals(set.region_locals);
  for (std::string line; std::getline(locals, line);) out += "  " + line + "\n";
  const auto stub = static_cast<int>(set.templates.size());
  out += "  goto L0;\n";
  int pos = 0;
  for (const Template &t : set.templates) {
    out += "  " + t.macro_name + "(" + std::to_string(pos) + ", L" + std::to_string(pos + 1) + ", 1, " +
           std::to_string(stub) + ", 2, " + std::to_string(code_of(t.opcode)) + ")\n";
    ++pos;
  }
  out += "L" + std::to_string(stub) + ":\n  return qj_outcome_make(QJ_OUT_EXIT, " + std::to_string(stub) + ", QJ_OK);\n}\n";
  return out;
}

}  // namespace

std::string render_switch_cases(const SemanticsAst &ast) {
  std::vector<std::string> lines;
  for (const CaseClause &clause : ast.clauses) {
    lines.push_back("/* " + ast.source_name + ":" + std::to_string(clause.begin.line) + " */");
    print_clause_labels(clause, lines);
    StmtPtr storage;
    print_stmt(clause_body(clause, storage), 1, lines);
  }
  std::string out = "/* Generated by qjit-templates from " + ast.source_name + ". Do not edit. */\n";
  out += "#define QJ_SEMANTICS_HASH_SWITCH " + hex64(ast.source_hash) + "\n";
  for (const auto &l : lines) out += l + "\n";
  return out;
}

std::string render_threaded_handlers(const SemanticsAst &ast) {
  std::string out = "/* Generated by qjit-templates from " + ast.source_name + ". Do not edit. */\n";
  out += "#define QJ_SEMANTICS_HASH_THREADED " + hex64(ast.source_hash) + "\n";

  for (const CaseClause &clause : ast.clauses) {
    StmtPtr storage;
    StmtPtr body = clause_body(clause, storage).clone();
    for (auto &s : body->body) rewrite_for_threading(s);
    std::vector<std::string> lines;
    lines.push_back("/* " + ast.source_name + ":" + std::to_string(clause.begin.line) + " */");
    print_stmt(*make_label(handler_label(clause), std::move(body)), 0, lines);
    for (const auto &l : lines) out += l + "\n";
  }
  return out;
}

std::string render_threaded_dispatch_table(const SemanticsAst &ast) {
  std::string out = "/* Generated by qjit-templates from " + ast.source_name + ". Do not edit. */\n";
  // Opcode code -> handler label, in numeric-code order.
  std::map<std::int32_t, std::string> table;
  for (const CaseClause &clause : ast.clauses) {
    for (const auto &label : clause.labels) {
      if (auto op = opcode_from_name(label)) table[code_of(*op)] = handler_label(clause);
    }
  }
  std::vector<std::string> entries;
  for (const auto &[code, label] : table) entries.push_back("&&" + label);
  out += "#define QJ_THREADED_DISPATCH_TABLE {";
  for (std::size_t i = 0; i < entries.size(); ++i) out += (i ? ", " : " ") + entries[i];
  out += " }\n";

  return out;
}

std::string render_opcode_table_markdown(const TemplateSet &set) {
  std::map<Opcode, const Template *> generic;
  for (const Template &t : set.templates) {
    if (!t.int_specialized) generic[t.opcode] = &t;
  }
  std::string out = "<!-- Generated by qjit-templates from " + set.source_name + ". Do not edit. -->\n";
  out += "# Opcodes\n\n";
  out += "Numeric codes are fixed for a build; compiled templates bake them in.\n\n";
  out += "| Code | Opcode | Template | Group file | Exits |\n";
  out += "|-----:|--------|----------|------------|-------|\n";
  for (Opcode op : kAllOpcodes) {
    auto it = generic.find(op);
    std::string macro = it == generic.end() ? "-" : it->second->macro_name;
    std::string file = it == generic.end() ? "-" : template_file_name(it->second->group);
    std::string exits = it == generic.end() ? "-" : exit_kinds_to_string(it->second->exit_kinds);
    out += "| " + std::to_string(code_of(op)) + " | " + std::string(opcode_name(op)) + " | `" + macro + "` | `" + file +
           "` | " + exits + " |\n";
  }
  return out;
}

EmittedLibrary emit_template_library(const TemplateSet &set, const fs::path &out_dir) {
  check_coverage(set);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ExtractError(ExtractError::Kind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  // Group order follows first appearance; generic templates precede variants.
  std::vector<std::string> order;
  std::map<std::string, std::string> bodies;
  for (bool variants : {false, true}) {
    for (const Template &t : set.templates) {
      if (t.int_specialized != variants) continue;
      if (!bodies.contains(t.group)) order.push_back(t.group);
      bodies[t.group] += render_template(t) + "\n";
    }
  }

  EmittedLibrary lib;
  for (const std::string &group : order) {
    std::string guard = "QJ_TMPL_";
    for (char c : group) guard += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    guard += "_INC";
    std::string text = banner(set, "/*", " */");
    text += "/* semantics hash " + hex64(set.source_hash) + " */\n";
    text += "#ifndef " + guard + "\n#define " + guard + "\n\n" + bodies[group] + "#endif\n";
    fs::path path = out_dir / template_file_name(group);
    write_file(path, text);
    lib.template_files.push_back(path);
  }
  lib.table_file = out_dir / "emitter_table.gen";
  write_file(lib.table_file, render_emitter_table(set));
  return lib;
}

std::vector<fs::path> emit_interpreter_sources(const SemanticsAst &ast, const TemplateSet &set, const fs::path &out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ExtractError(ExtractError::Kind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::string locals = "/* Generated by qjit-templates from " + ast.source_name + ". Do not edit. */\n";
  locals += "#define QJ_SEMANTIC_LOCALS";
  for (const auto &d : ast.declarations) locals += " \\\n  " + d->text + ";";
  locals += "\n";

  std::string hash = "/* Generated by qjit-templates from " + ast.source_name + ". Do not edit. */\n";
  hash += "#define QJ_SEMANTICS_SOURCE_HASH " + hex64(ast.source_hash) + "\n";

  std::vector<std::pair<fs::path, std::string>> files = {
      {out_dir / "switch_cases.inc", render_switch_cases(ast)},
      {out_dir / "threaded_handlers.inc", render_threaded_handlers(ast)},
      {out_dir / "threaded_table.h", render_threaded_dispatch_table(ast)},
      {out_dir / "semantic_locals.h", locals},
      {out_dir / "semantics_hash.h", hash},
      {out_dir / "template_smoke.c", render_template_smoke(set)},
      {out_dir / "opcodes.md", render_opcode_table_markdown(set)},
  };
  std::vector<fs::path> written;
  for (const auto &[path, text] : files) {
    write_file(path, text);
    written.push_back(path);
  }
  return written;
}

EmittedLibrary run_extractor(const fs::path &semantics, const fs::path &out_dir, bool specialize,
                             const fs::path &interp_dir) {
  SemanticsAst ast = parse_semantics_source(semantics);
  TemplateSet set = build_template_set(ast, specialize);
  EmittedLibrary lib = emit_template_library(set, out_dir);
  if (!interp_dir.empty()) emit_interpreter_sources(ast, set, interp_dir);
  return lib;
}

}  // namespace qjit::extract

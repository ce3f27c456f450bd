#pragma once

#include <string>
#include <vector>

#include "qjit/extract/ast.hpp"

namespace qjit::extract {

std::string print_expr(const Expr &e);

/// Renders a statement as source lines indented by `indent` levels of two spaces.
void print_stmt(const Stmt &s, int indent, std::vector<std::string> &lines);

std::string print_stmt(const Stmt &s, int indent = 0);

/// Joins lines into a macro body with backslash continuations.
std::string join_macro_lines(const std::vector<std::string> &lines);

/// Collapses whitespace so generated code can be compared against goldens
/// independent of layout. Line continuations are dropped.
std::string normalize_whitespace(std::string_view text);

}  // namespace qjit::extract

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qjit/extract/ast.hpp"

namespace qjit::extract {

/// Reads and parses an opcode-semantics file. `#include` lines and QJ_NOINLINE
/// annotations are stripped before parsing.
SemanticsAst parse_semantics_source(const std::filesystem::path &path);

/// Same as parse_semantics_source over in-memory text.
SemanticsAst parse_semantics_text(std::string_view text, std::string source_name = "<memory>");

}  // namespace qjit::extract

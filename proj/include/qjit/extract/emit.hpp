#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qjit/extract/transform.hpp"

namespace qjit::extract {

struct EmittedLibrary {
  std::vector<std::filesystem::path> template_files;
  std::filesystem::path table_file;
};

/// Writes one `tmpl_<group>.inc` per opcode group and the generated emitter
/// table `emitter_table.gen` into `out_dir`. Coverage of the instruction set is
/// checked before anything is written.
EmittedLibrary emit_template_library(const TemplateSet &set, const std::filesystem::path &out_dir);

/// Writes the interpreter-side artifacts generated from the same source:
/// switch cases, threaded handlers, the shared locals, the source hash, a
/// C smoke file instantiating every template, and opcodes.md.
std::vector<std::filesystem::path> emit_interpreter_sources(const SemanticsAst &ast,
                                                            const TemplateSet &set,
                                                            const std::filesystem::path &out_dir);

/// Text of the switch-interpreter cases (the dispatch body, reprinted).
std::string render_switch_cases(const SemanticsAst &ast);

/// Text of the threaded-interpreter handlers.
std::string render_threaded_handlers(const SemanticsAst &ast);

/// `QJ_THREADED_DISPATCH_TABLE`: handler label addresses by opcode code.
std::string render_threaded_dispatch_table(const SemanticsAst &ast);

std::string render_opcode_table_markdown(const TemplateSet &set);

/// Runs the whole extractor: parse, transform, emit templates (always with
/// integer variants when `specialize`), and optionally interpreter sources.
EmittedLibrary run_extractor(const std::filesystem::path &semantics, const std::filesystem::path &out_dir,
                             bool specialize, const std::filesystem::path &interp_dir = {});

}  // namespace qjit::extract

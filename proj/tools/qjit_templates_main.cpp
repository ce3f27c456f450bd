// Build-time template extractor. The same code backs `qjit templates`.
#include <iostream>

#include "CLI11.hpp"
#include "qjit/extract/emit.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Extract opcode templates and interpreter bodies from the semantics source"};
  std::string semantics;
  std::string out_dir;
  std::string interp_dir;
  bool specialize = false;
  app.add_option("--semantics", semantics, "Opcode semantics source")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Directory for tmpl_*.inc and emitter_table.gen")->required();
  app.add_option("--interp-out", interp_dir, "Directory for the interpreter sources");
  app.add_flag("--specialize", specialize, "Also emit integer-specialized comparison templates");
  CLI11_PARSE(app, argc, argv);

  try {
    qjit::extract::run_extractor(semantics, out_dir, specialize, interp_dir);
  } catch (const qjit::Error &e) {
    std::cerr << "qjit-templates: " << semantics << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

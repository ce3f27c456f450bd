#include <dlfcn.h>
#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <vector>

#include "clock.hpp"
#include "qjit/error.hpp"
#include "qjit/jit.hpp"

extern char **environ;

namespace qjit {

std::string default_toolchain() { return QJIT_DEFAULT_TOOLCHAIN; }
std::filesystem::path default_include_dir() { return QJIT_DEFAULT_INCLUDE_DIR; }
std::filesystem::path default_template_dir() { return QJIT_DEFAULT_TEMPLATE_DIR; }

std::optional<std::uint32_t> parse_threshold(std::string_view text) {
  if (text == "inf" || text == "never") return LoopDetector::kNever;
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v == 0) return std::nullopt;
  return v;
}

JitConfig JitConfig::from_env() {
  JitConfig c;
  if (const char *v = std::getenv("QJIT_TOOLCHAIN"); v && *v) c.toolchain = v;
  if (const char *v = std::getenv("QJIT_OPT"); v && *v) c.opt_level = v;
  if (const char *v = std::getenv("QJIT_THRESHOLD"); v && *v) {
    auto t = parse_threshold(v);
    if (!t) throw Error(std::string("QJIT_THRESHOLD: expected a positive integer or 'inf', got '") + v + "'");
    c.threshold = *t;
  }
  if (const char *v = std::getenv("QJIT_TMPDIR"); v && *v) c.temp_dir = v;
  if (const char *v = std::getenv("QJIT_KEEP_ARTIFACTS"); v && std::string_view(v) == "1") c.keep_artifacts = true;
  return c;
}

// ---------------------------------------------------------------------------
// Detector

std::optional<Region> LoopDetector::observe_jump(Program &program, std::int32_t from_pc, std::int32_t to_pc) {
  if (to_pc >= from_pc) return std::nullopt;
  Op &head = program.ops.at(static_cast<std::size_t>(to_pc));
  tails_[to_pc] = from_pc;
  if (head.hot_count < std::numeric_limits<std::uint32_t>::max()) ++head.hot_count;
  if (threshold_ != kNever && head.hot_count == static_cast<std::uint64_t>(threshold_) + 1) {
    return Region{to_pc, from_pc};
  }
  return std::nullopt;
}

std::optional<std::int32_t> LoopDetector::tail_of(std::int32_t head_pc) const {
  auto it = tails_.find(head_pc);
  if (it == tails_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Module registry and scratch directory

namespace {

struct Registry {
  std::mutex mu;
  std::vector<void *> handles;
  std::filesystem::path scratch;
  std::atomic<std::uint64_t> seq{0};

  ~Registry() {
    // Leave loaded modules alone; only drop the scratch dir if it is empty.
    std::error_code ec;
    if (!scratch.empty()) std::filesystem::remove(scratch, ec);
  }
};

Registry &registry() {
  static Registry r;
  return r;
}

std::filesystem::path work_dir(const JitConfig &config) {
  if (!config.temp_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.temp_dir, ec);
    if (ec) throw JitError(JitError::Kind::Io, "cannot create " + config.temp_dir.string() + ": " + ec.message());
    return config.temp_dir;
  }
  Registry &r = registry();
  std::lock_guard lock(r.mu);
  if (r.scratch.empty()) {
    std::string tmpl = (std::filesystem::temp_directory_path() / "qjit-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) {
      throw JitError(JitError::Kind::Io, "mkdtemp " + tmpl + ": " + std::strerror(errno));
    }
    r.scratch = tmpl;
  }
  return r.scratch;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::string read_file(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void remove_quietly(const std::filesystem::path &p) {
  std::error_code ec;
  std::filesystem::remove(p, ec);
}

}  // namespace

std::size_t loaded_module_count() {
  Registry &r = registry();
  std::lock_guard lock(r.mu);
  return r.handles.size();
}

// ---------------------------------------------------------------------------
// Compile

CompiledModule compile_region(const RegionSource &source, const JitConfig &config) {
  std::filesystem::path dir = work_dir(config);
  CompiledModule mod;
  mod.symbol = source.symbol;
  mod.source_path = dir / (source.file_stem + ".c");
  // Unique per compilation: the loader would hand back an already loaded
  // object for a reused path.
  std::uint64_t seq = registry().seq.fetch_add(1);
  mod.module_path = dir / (source.file_stem + "-" + std::to_string(getpid()) + "-" + std::to_string(seq) + ".so");
  std::filesystem::path log_path = mod.module_path;
  log_path.replace_extension(".log");

  {
    std::ofstream os(mod.source_path, std::ios::binary | std::ios::trunc);
    os << source.text;
    if (!os.flush()) throw JitError(JitError::Kind::Io, "cannot write " + mod.source_path.string());
  }

  std::vector<std::string> args = split_words(config.toolchain);
  if (args.empty()) throw JitError(JitError::Kind::ToolchainMissing, "no toolchain configured");
  std::string opt = config.opt_level;
  args.push_back(!opt.empty() && opt[0] == '-' ? opt : "-O" + opt);
  for (const char *flag : {"-fPIC", "-shared", "-nostdlib", "-w", "-pipe"}) args.emplace_back(flag);
  args.push_back("-I" + config.include_dir.string());
  args.push_back("-I" + config.template_dir.string());
  args.push_back("-o");
  args.push_back(mod.module_path.string());
  args.push_back(mod.source_path.string());

  std::vector<char *> argv;
  for (auto &a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);

  detail::Stopwatch clock;
  pid_t pid = 0;
  int err = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  int status = 0;
  if (err == 0) {
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
  }
  mod.compile_ns = std::max<std::int64_t>(clock.wall(), 1);

  std::string diagnostics = read_file(log_path);
  remove_quietly(log_path);
  if (!config.keep_artifacts) remove_quietly(mod.source_path);

  if (err != 0) {
    throw JitError(err == ENOENT ? JitError::Kind::ToolchainMissing : JitError::Kind::CompileFailed,
                   "cannot run '" + args[0] + "': " + std::strerror(err));
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
    throw JitError(JitError::Kind::ToolchainMissing, "toolchain '" + args[0] + "' not found", diagnostics);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    remove_quietly(mod.module_path);
    throw JitError(JitError::Kind::CompileFailed, "compiling " + source.file_stem + " failed", diagnostics);
  }
  return mod;
}

// ---------------------------------------------------------------------------
// Load

void load_and_install(const CompiledModule &module, Program &program, std::int32_t head_pc, const JitConfig &config) {
  Op &head = program.ops.at(static_cast<std::size_t>(head_pc));
  if (head.compiled_entry != nullptr) {
    throw JitError(JitError::Kind::AlreadyInstalled, "op " + std::to_string(head_pc) + " already has a compiled entry");
  }
  void *handle = dlopen(module.module_path.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (handle == nullptr) {
    const char *why = dlerror();
    throw JitError(JitError::Kind::LoadFailed, why ? why : "dlopen failed");
  }
  void *sym = dlsym(handle, module.symbol.c_str());
  if (sym == nullptr) {
    const char *why = dlerror();
    throw JitError(JitError::Kind::LoadFailed, why ? why : "symbol " + module.symbol + " not found");
  }
  {
    Registry &r = registry();
    std::lock_guard lock(r.mu);
    r.handles.push_back(handle);
  }
  if (!config.keep_artifacts) remove_quietly(module.module_path);
  head.compiled_entry = reinterpret_cast<qj_region_fn>(sym);
}

}  // namespace qjit

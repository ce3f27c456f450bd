#pragma once

#include <sys/resource.h>
#include <time.h>

#include <chrono>
#include <cstdint>

namespace qjit::detail {

inline std::int64_t process_cpu_ns() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<std::int64_t>(ts.tv_sec) * 1000000000 + ts.tv_nsec;
}

// CPU time of waited-for child processes (the JIT's compiler runs).
inline std::int64_t children_cpu_ns() {
  rusage ru{};
  getrusage(RUSAGE_CHILDREN, &ru);
  auto ns = [](const timeval &tv) { return static_cast<std::int64_t>(tv.tv_sec) * 1000000000 + tv.tv_usec * 1000; };
  return ns(ru.ru_utime) + ns(ru.ru_stime);
}

inline std::int64_t wall_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// Wall time and CPU time (this process plus children it waited for) since
/// construction.
class Stopwatch {
 public:
  Stopwatch() : wall_(wall_ns()), cpu_(process_cpu_ns() + children_cpu_ns()) {}
  std::int64_t wall() const { return wall_ns() - wall_; }
  std::int64_t cpu() const { return process_cpu_ns() + children_cpu_ns() - cpu_; }

 private:
  std::int64_t wall_;
  std::int64_t cpu_;
};

}  // namespace qjit::detail

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qjit/backends.hpp"
#include "qjit/jit.hpp"
#include "qjit/planner.hpp"
#include "qjit/storage.hpp"

namespace qjit::testing {

using Rows = std::vector<std::vector<Value>>;

/// Reference ordering written independently of the runtime: Null below
/// numbers below text, numbers compared after widening to long double.
Ordering oracle_compare(const Value &a, const Value &b);

bool oracle_holds(const Predicate &p, const Value &v);

/// Rows of `column` for which the predicate holds, in scan order.
Rows oracle_filter(const Table &table, const Predicate &p, std::int32_t column = 0);

/// Single `i` column table.
Table int_table(const std::vector<std::int64_t> &values, std::string name = "test");

/// Column `i` of type Any mixing Int, Real, Text and Null cells.
Table mixed_table(std::int64_t rows, std::uint64_t seed, std::string name = "test");

Database single_table_db(Table table);

Predicate random_predicate(std::mt19937_64 &rng, int depth, std::int64_t lo, std::int64_t hi);

Rows run_rows(Backend backend, Program &program, const Database &db, const JitConfig *jit = nullptr,
              RunStats *stats = nullptr);

/// Fresh program from the query text for each call.
Rows run_query(Backend backend, const std::string &query, const Database &db, const JitConfig *jit = nullptr,
               RunStats *stats = nullptr);

JitConfig test_jit_config(std::uint32_t threshold = 2);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace qjit::testing

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qjit/opcode.hpp"
#include "qjit/program.hpp"
#include "qjit/storage.hpp"

namespace qjit {

enum class CmpOp { Lt, Gt, Le, Ge, Eq, Ne };

std::string_view cmp_symbol(CmpOp op);
Opcode cmp_opcode(CmpOp op);
bool cmp_holds(CmpOp op, Ordering ord);

struct Atom {
  std::string column;
  CmpOp op = CmpOp::Lt;
  std::int64_t literal = 0;
};

struct Predicate {
  enum class Kind { True, Atom, And, Or };

  Kind kind = Kind::True;
  Atom atom;
  std::vector<Predicate> children;

  static Predicate always() { return {}; }
  static Predicate compare(std::string column, CmpOp op, std::int64_t literal);
  static Predicate all_of(std::vector<Predicate> children);
  static Predicate any_of(std::vector<Predicate> children);
};

/// Text form using the query grammar.
std::string to_string(const Predicate &p);

struct QueryAst {
  std::string column;
  std::string table;
  Predicate predicate;
};

/// query := SELECT ident FROM ident [WHERE or] [;]
/// or := and {OR and};  and := atom {AND atom};
/// atom := ( or ) | ident cmp int;  cmp := < > <= >= = <>
/// Keywords are case-insensitive. Throws SyntaxError.
QueryAst parse_query(std::string_view text);

/// Instruction positions of a planned query.
struct PlanLayout {
  std::int32_t init = 0;
  std::int32_t open_read = 0;
  std::int32_t rewind = 0;
  std::int32_t loop_head = 0;
  std::int32_t compare_begin = 0;
  std::int32_t compare_end = 0;  // one past the last comparison
  std::int32_t copy = 0;
  std::int32_t result_row = 0;
  std::int32_t next = 0;
  std::int32_t halt = 0;
  std::int32_t transaction = 0;
  std::int32_t constants_begin = 0;
  std::int32_t constants_end = 0;
  std::int32_t goto_open = 0;
};

struct PlannedQuery {
  Program program;
  PlanLayout layout;
};

/// Bytecode in the shape of a SQLite full-scan plan: Init jumps to the
/// Transaction/Integer block at the end, which jumps back to OpenRead; the
/// loop is Column, comparisons, Copy, ResultRow, Next. `table_id` is the
/// OpenRead operand. Throws PlanError.
PlannedQuery plan_query(const QueryAst &ast, const TableSchema &schema, std::int32_t table_id = 0);
Program plan(const QueryAst &ast, const TableSchema &schema, std::int32_t table_id = 0);
Program plan(const QueryAst &ast, const Database &db);

/// parse_query + plan against `db`.
Program compile_query(std::string_view text, const Database &db);

/// `(i<a AND i>a+5)` for a = 1, 101, 201, ... joined with OR; k = 0 gives
/// `(i<0 AND i>1)`. A bound appends the satisfiable group `(i<bound AND i>-1)`.
std::string gen_bench_query(int k, std::optional<std::int64_t> bound = std::nullopt);

/// Instructions from the loop head to its Next, inclusive.
int count_loop_ops(const Program &program);

}  // namespace qjit

#include "support.hpp"

#include <cmath>
#include <cstdlib>

#include "qjit/error.hpp"

namespace qjit::testing {
namespace {

int rank(const Value &v) {
  switch (v.type()) {
    case ValueType::Null: return 0;
    case ValueType::Int:
    case ValueType::Real: return 1;
    case ValueType::Text: return 2;
  }
  return 3;
}

Ordering sign(int c) { return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal); }

}  // namespace

Ordering oracle_compare(const Value &a, const Value &b) {
  if (rank(a) != rank(b)) return rank(a) < rank(b) ? Ordering::Less : Ordering::Greater;
  switch (a.type()) {
    case ValueType::Null: return Ordering::Equal;
    case ValueType::Text: {
      int c = a.as_text().compare(b.as_text());
      return sign(c);
    }
    default: break;
  }
  auto widen = [](const Value &v) {
    return v.type() == ValueType::Int ? static_cast<long double>(v.as_int()) : static_cast<long double>(v.as_real());
  };
  long double x = widen(a);
  long double y = widen(b);
  if (std::isnan(x) || std::isnan(y)) {
    if (std::isnan(x) && std::isnan(y)) return Ordering::Equal;
    return std::isnan(x) ? Ordering::Less : Ordering::Greater;
  }
  return x < y ? Ordering::Less : (x > y ? Ordering::Greater : Ordering::Equal);
}

bool oracle_holds(const Predicate &p, const Value &v) {
  switch (p.kind) {
    case Predicate::Kind::True: return true;
    case Predicate::Kind::Atom: {
      Ordering o = oracle_compare(v, Value::integer(p.atom.literal));
      switch (p.atom.op) {
        case CmpOp::Lt: return o == Ordering::Less;
        case CmpOp::Le: return o != Ordering::Greater;
        case CmpOp::Gt: return o == Ordering::Greater;
        case CmpOp::Ge: return o != Ordering::Less;
        case CmpOp::Eq: return o == Ordering::Equal;
        case CmpOp::Ne: return o != Ordering::Equal;
      }
      return false;
    }
    case Predicate::Kind::And:
      for (const auto &c : p.children) {
        if (!oracle_holds(c, v)) return false;
      }
      return true;
    case Predicate::Kind::Or:
      for (const auto &c : p.children) {
        if (oracle_holds(c, v)) return true;
      }
      return false;
  }
  return false;
}

Rows oracle_filter(const Table &table, const Predicate &p, std::int32_t column) {
  Rows out;
  for (std::int64_t r = 0; r < table.row_count(); ++r) {
    Value v = table.value(r, column);
    if (oracle_holds(p, v)) out.push_back({v});
  }
  return out;
}

Table int_table(const std::vector<std::int64_t> &values, std::string name) {
  Table t(TableSchema{std::move(name), {{"i", ColumnType::Int}}});
  for (auto v : values) t.append_int_row(v);
  return t;
}

Table mixed_table(std::int64_t rows, std::uint64_t seed, std::string name) {
  std::mt19937_64 rng(seed);
  Table t(TableSchema{std::move(name), {{"i", ColumnType::Any}}});
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<std::int64_t> num(-50, 1050);
  for (std::int64_t r = 0; r < rows; ++r) {
    int k = kind(rng);
    Value v;
    if (k < 6) {
      v = Value::integer(num(rng));
    } else if (k < 8) {
      v = Value::real(static_cast<double>(num(rng)) + 0.5);
    } else if (k < 9) {
      v = Value::text("t" + std::to_string(num(rng)));
    }
    std::vector<Value> row{v};
    t.append_row(row);
  }
  return t;
}

Database single_table_db(Table table) {
  Database db;
  db.add_table(std::move(table));
  return db;
}

Predicate random_predicate(std::mt19937_64 &rng, int depth, std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 3 : 0);
  int k = pick(rng);
  if (k <= 1) {
    std::uniform_int_distribution<int> op(0, 5);
    std::uniform_int_distribution<std::int64_t> lit(lo, hi);
    return Predicate::compare("i", static_cast<CmpOp>(op(rng)), lit(rng));
  }
  std::uniform_int_distribution<int> width(1, 3);
  std::vector<Predicate> kids;
  int n = width(rng);
  for (int c = 0; c < n; ++c) kids.push_back(random_predicate(rng, depth - 1, lo, hi));
  return k == 2 ? Predicate::all_of(std::move(kids)) : Predicate::any_of(std::move(kids));
}

Rows run_rows(Backend backend, Program &program, const Database &db, const JitConfig *jit, RunStats *stats) {
  RowCollector rows;
  RunStats s = run_backend(backend, program, db, rows.sink(), jit);
  if (stats) *stats = s;
  return rows.rows;
}

Rows run_query(Backend backend, const std::string &query, const Database &db, const JitConfig *jit,
               RunStats *stats) {
  Program program = compile_query(query, db);
  return run_rows(backend, program, db, jit, stats);
}

JitConfig test_jit_config(std::uint32_t threshold) {
  JitConfig config;
  config.threshold = threshold;
  return config;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "qjit-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw Error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace qjit::testing

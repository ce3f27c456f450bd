#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "qjit/error.hpp"
#include "qjit/storage.hpp"
#include "support.hpp"

namespace qjit {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void dump(const std::filesystem::path &p, const std::string &bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

StorageError::Kind load_error(const std::filesystem::path &p, std::string *what = nullptr) {
  try {
    load_table(p);
  } catch (const StorageError &e) {
    if (what) *what = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "load_table accepted " << p;
  return StorageError::Kind::Io;
}

TEST(Generate, EmptyAndDeterministic) {
  EXPECT_EQ(generate_table(0, 1, {0, 10}).row_count(), 0);
  Table a = generate_table(1000, 1, {0, 1000});
  Table b = generate_table(1000, 1, {0, 1000});
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == generate_table(1000, 2, {0, 1000}));
  for (std::int64_t r = 0; r < a.row_count(); ++r) {
    std::int64_t v = a.value(r, 0).as_int();
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 1000);
  }
}

TEST(Generate, SelectivityWithinBinomialBound) {
  const std::int64_t n = 1000000;
  Table t = generate_table(n, 7, {0, n});
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < n; ++r) hits += t.cell(r, 0).u.i < 2000;
  double p = 0.002;
  double sigma = std::sqrt(n * p * (1 - p));
  EXPECT_LE(std::abs(static_cast<double>(hits) - n * p), 3 * sigma) << hits;
}

TEST(TableFile, RoundTrip) {
  TempDir dir;
  Table t = generate_table(5000, 3, {-100, 100});
  save_table(t, dir.path() / "t.qjdb");
  EXPECT_EQ(load_table(dir.path() / "t.qjdb"), t);

  Table m = testing::mixed_table(300, 4);
  save_table(m, dir.path() / "m.qjdb");
  Table back = load_table(dir.path() / "m.qjdb");
  ASSERT_EQ(back.row_count(), m.row_count());
  for (std::int64_t r = 0; r < m.row_count(); ++r) EXPECT_EQ(back.value(r, 0), m.value(r, 0));
  EXPECT_EQ(back.schema().columns, m.schema().columns);
}

TEST(TableFile, TruncatedIsFormatError) {
  TempDir dir;
  save_table(generate_table(10, 1, {0, 10}), dir.path() / "t.qjdb");
  std::string bytes = slurp(dir.path() / "t.qjdb");
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{9}, bytes.size() - 1}) {
    dump(dir.path() / "cut.qjdb", bytes.substr(0, cut));
    EXPECT_EQ(load_error(dir.path() / "cut.qjdb"), StorageError::Kind::Format) << cut;
  }
  dump(dir.path() / "long.qjdb", bytes + "x");
  EXPECT_EQ(load_error(dir.path() / "long.qjdb"), StorageError::Kind::Format);
}

TEST(TableFile, UnknownVersionNamed) {
  TempDir dir;
  save_table(generate_table(10, 1, {0, 10}), dir.path() / "t.qjdb");
  std::string bytes = slurp(dir.path() / "t.qjdb");
  bytes[4] = 9;
  dump(dir.path() / "v.qjdb", bytes);
  std::string what;
  EXPECT_EQ(load_error(dir.path() / "v.qjdb", &what), StorageError::Kind::Format);
  EXPECT_NE(what.find('9'), std::string::npos) << what;
}

TEST(TableFile, MissingFileIsIo) {
  EXPECT_EQ(load_error("/nonexistent/qjit/t.qjdb"), StorageError::Kind::Io);
}

TEST(Csv, IntColumn) {
  TableSchema s{"test", {{"i", ColumnType::Int}}};
  Table t = parse_csv("5\n25\n7\n", s);
  ASSERT_EQ(t.row_count(), 3);
  EXPECT_EQ(t.value(1, 0), Value::integer(25));
}

TEST(Csv, BadIntegerReportsRow) {
  TableSchema s{"test", {{"i", ColumnType::Int}}};
  try {
    parse_csv("abc\n", s);
    FAIL();
  } catch (const StorageError &e) {
    EXPECT_EQ(e.kind(), StorageError::Kind::Parse);
    EXPECT_EQ(e.row(), 1);
  }
  try {
    parse_csv("1\n2\n3x\n", s);
    FAIL();
  } catch (const StorageError &e) {
    EXPECT_EQ(e.row(), 3);
  }
}

TEST(Csv, MixedAnyColumnKeepsTypes) {
  TempDir dir;
  dump(dir.path() / "m.csv", "5,x\nhello,1.5\n,7\n-3,\n");
  TableSchema s{"test", {{"i", ColumnType::Any}, {"j", ColumnType::Any}}};
  Table t = import_csv(dir.path() / "m.csv", s);
  ASSERT_EQ(t.row_count(), 4);
  EXPECT_EQ(t.value(0, 0), Value::integer(5));
  EXPECT_EQ(t.value(0, 1), Value::text("x"));
  EXPECT_EQ(t.value(1, 0), Value::text("hello"));
  EXPECT_EQ(t.value(1, 1), Value::real(1.5));
  EXPECT_TRUE(t.value(2, 0).is_null());
  EXPECT_EQ(t.value(3, 0), Value::integer(-3));
  save_table(t, dir.path() / "m.qjdb");
  EXPECT_EQ(load_table(dir.path() / "m.qjdb"), t);
}

TEST(Csv, WrongArity) {
  TableSchema s{"test", {{"i", ColumnType::Int}, {"j", ColumnType::Int}}};
  EXPECT_THROW(parse_csv("1\n", s), StorageError);
}

TEST(Table, TypeCheckedAppendAndCopy) {
  Table t(TableSchema{"t", {{"i", ColumnType::Int}}});
  std::vector<Value> bad{Value::text("x")};
  EXPECT_THROW(t.append_row(bad), StorageError);
  Table m(TableSchema{"m", {{"s", ColumnType::Text}}});
  std::vector<Value> row{Value::text("abc")};
  m.append_row(row);
  Table copy = m;
  m = Table(TableSchema{"m", {{"s", ColumnType::Text}}});
  EXPECT_EQ(copy.value(0, 0), Value::text("abc"));
}

TEST(Database, Lookup) {
  Database db;
  EXPECT_EQ(db.add_table(testing::int_table({1}, "a")), 0);
  EXPECT_EQ(db.add_table(testing::int_table({1, 2}, "b")), 1);
  EXPECT_EQ(db.find_table("b"), 1);
  EXPECT_FALSE(db.find_table("c"));
  EXPECT_EQ(db.view().ntable, 2);
  EXPECT_EQ(db.view().tables[1].nrow, 2);
}

}  // namespace
}  // namespace qjit

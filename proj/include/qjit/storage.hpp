#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qjit/value.hpp"
#include "qjit/vdbe.h"

namespace qjit {

enum class ColumnType : std::uint8_t { Int = 1, Real = 2, Text = 3, Any = 4 };

std::string_view column_type_name(ColumnType t);
std::optional<ColumnType> column_type_from_name(std::string_view name);

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Any;

  friend bool operator==(const ColumnDef &, const ColumnDef &) = default;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnDef> columns;

  std::optional<std::int32_t> column_index(std::string_view column) const;

  friend bool operator==(const TableSchema &, const TableSchema &) = default;
};

/// Row-major in-memory table. Cells are `qj_value`s so cursors read them
/// without conversion; text cells point into storage owned by the table.
class Table {
 public:
  explicit Table(TableSchema schema);

  Table(const Table &other);
  Table &operator=(const Table &other);
  Table(Table &&) noexcept = default;
  Table &operator=(Table &&) noexcept = default;

  const TableSchema &schema() const { return schema_; }
  std::int64_t row_count() const;
  std::int32_t column_count() const { return static_cast<std::int32_t>(schema_.columns.size()); }

  /// Appends one row. Throws StorageError(Schema) on arity or type mismatch.
  void append_row(std::span<const Value> row);
  void append_int_row(std::int64_t v);
  void reserve(std::int64_t rows);

  Value value(std::int64_t row, std::int32_t column) const;
  std::vector<Value> row(std::int64_t row) const;
  const qj_value &cell(std::int64_t row, std::int32_t column) const;

  qj_table_ref ref() const;

  /// Same columns and cells; the table name is not compared.
  friend bool operator==(const Table &a, const Table &b);

 private:
  void push_cell(const Value &v);

  TableSchema schema_;
  std::vector<qj_value> cells_;
  std::vector<std::unique_ptr<std::string>> text_;
};

/// Set of tables addressed by id (the OpenRead p2 operand).
class Database {
 public:
  Database() = default;

  std::int32_t add_table(Table table);
  std::optional<std::int32_t> find_table(std::string_view name) const;
  const Table &table(std::int32_t id) const { return *tables_.at(static_cast<std::size_t>(id)); }
  std::int32_t table_count() const { return static_cast<std::int32_t>(tables_.size()); }

  /// C view for the VM. Valid until the next add_table.
  qj_db view() const;

 private:
  std::vector<std::shared_ptr<const Table>> tables_;
  std::vector<qj_table_ref> refs_;
};

struct ValueRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // exclusive
};

/// Single Int column `i`, uniform over [range.lo, range.hi).
Table generate_table(std::int64_t n_rows, std::uint64_t seed, ValueRange range, std::string name = "test");

inline constexpr std::uint8_t kFormatVersion = 1;

void save_table(const Table &table, const std::filesystem::path &path);
/// The file stores columns and rows only; the table is named `name`.
Table load_table(const std::filesystem::path &path, std::string name = "test");

/// Headerless CSV, one record per line, fields separated by commas. Empty
/// field is Null. Any columns try Int, then Real, then keep Text.
Table import_csv(const std::filesystem::path &path, const TableSchema &schema);
Table parse_csv(std::string_view text, const TableSchema &schema);

}  // namespace qjit

#include "qjit/storage.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "qjit/error.hpp"

namespace qjit {

std::string_view column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Int: return "int";
    case ColumnType::Real: return "real";
    case ColumnType::Text: return "text";
    case ColumnType::Any: return "any";
  }
  return "?";
}

std::optional<ColumnType> column_type_from_name(std::string_view name) {
  for (auto t : {ColumnType::Int, ColumnType::Real, ColumnType::Text, ColumnType::Any}) {
    if (column_type_name(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<std::int32_t> TableSchema::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return static_cast<std::int32_t>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Table

Table::Table(TableSchema schema) : schema_(std::move(schema)) {
  std::set<std::string> seen;
  for (const auto &c : schema_.columns) {
    if (!seen.insert(c.name).second) {
      throw StorageError(StorageError::Kind::Schema, "duplicate column name '" + c.name + "'");
    }
  }
}

Table::Table(const Table &other) : schema_(other.schema_) {
  cells_.reserve(other.cells_.size());
  for (const qj_value &c : other.cells_) push_cell(Value::from_cell(c));
}

Table &Table::operator=(const Table &other) {
  if (this != &other) *this = Table(other);
  return *this;
}

std::int64_t Table::row_count() const {
  if (schema_.columns.empty()) return 0;
  return static_cast<std::int64_t>(cells_.size() / schema_.columns.size());
}

void Table::reserve(std::int64_t rows) { cells_.reserve(static_cast<std::size_t>(rows) * schema_.columns.size()); }

void Table::push_cell(const Value &v) {
  qj_value c = v.cell();
  if (v.type() == ValueType::Text) {
    text_.push_back(std::make_unique<std::string>(v.as_text()));
    c.u.z = text_.back()->data();
  }
  cells_.push_back(c);
}

void Table::append_row(std::span<const Value> row) {
  if (row.size() != schema_.columns.size()) {
    throw StorageError(StorageError::Kind::Schema, "row has " + std::to_string(row.size()) +
                                                       " values, table '" + schema_.name + "' has " +
                                                       std::to_string(schema_.columns.size()) + " columns");
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    ColumnType want = schema_.columns[i].type;
    if (want == ColumnType::Any || row[i].is_null()) continue;
    if (static_cast<int>(row[i].type()) != static_cast<int>(want)) {
      throw StorageError(StorageError::Kind::Schema,
                         "column '" + schema_.columns[i].name + "' is " + std::string(column_type_name(want)) +
                             ", got " + std::string(type_name(row[i].type())),
                         row_count(), static_cast<int>(i));
    }
  }
  for (const Value &v : row) push_cell(v);
}

void Table::append_int_row(std::int64_t v) {
  Value row[] = {Value::integer(v)};
  append_row(row);
}

const qj_value &Table::cell(std::int64_t row, std::int32_t column) const {
  return cells_.at(static_cast<std::size_t>(row) * schema_.columns.size() + static_cast<std::size_t>(column));
}

Value Table::value(std::int64_t row, std::int32_t column) const { return Value::from_cell(cell(row, column)); }

std::vector<Value> Table::row(std::int64_t r) const {
  std::vector<Value> out;
  for (std::int32_t c = 0; c < column_count(); ++c) out.push_back(value(r, c));
  return out;
}

qj_table_ref Table::ref() const {
  return qj_table_ref{cells_.data(), row_count(), column_count()};
}

bool operator==(const Table &a, const Table &b) {
  if (a.schema_.columns != b.schema_.columns || a.cells_.size() != b.cells_.size()) return false;
  for (std::size_t i = 0; i < a.cells_.size(); ++i) {
    if (!(Value::from_cell(a.cells_[i]) == Value::from_cell(b.cells_[i]))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Database

std::int32_t Database::add_table(Table table) {
  if (find_table(table.schema().name)) {
    throw StorageError(StorageError::Kind::Schema, "table '" + table.schema().name + "' already exists");
  }
  tables_.push_back(std::make_shared<const Table>(std::move(table)));
  refs_.push_back(tables_.back()->ref());
  return static_cast<std::int32_t>(tables_.size() - 1);
}

std::optional<std::int32_t> Database::find_table(std::string_view name) const {
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (tables_[i]->schema().name == name) return static_cast<std::int32_t>(i);
  }
  return std::nullopt;
}

qj_db Database::view() const { return qj_db{refs_.data(), static_cast<std::int32_t>(refs_.size())}; }

// ---------------------------------------------------------------------------
// Generation

Table generate_table(std::int64_t n_rows, std::uint64_t seed, ValueRange range, std::string name) {
  if (range.hi <= range.lo) {
    throw StorageError(StorageError::Kind::Schema, "empty value range [" + std::to_string(range.lo) + ", " +
                                                       std::to_string(range.hi) + ")");
  }
  Table t(TableSchema{std::move(name), {{"i", ColumnType::Int}}});
  t.reserve(n_rows);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> dist(range.lo, range.hi - 1);
  for (std::int64_t r = 0; r < n_rows; ++r) t.append_int_row(dist(rng));
  return t;
}

// ---------------------------------------------------------------------------
// Binary format

namespace {

constexpr char kMagic[4] = {'Q', 'J', 'D', 'B'};

class Writer {
 public:
  explicit Writer(std::ostream &os) : os_(os) {}

  void u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void bytes(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  void le(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os_.write(buf, n);
  }
  std::ostream &os_;
};

class Reader {
 public:
  Reader(const std::string &data, const std::filesystem::path &path) : data_(data), path_(path) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::string bytes() {
    std::uint32_t n = u32();
    return std::string(take(n));
  }
  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) {
      throw StorageError(StorageError::Kind::Format,
                         path_.string() + ": truncated file (needed " + std::to_string(n) + " bytes at offset " +
                             std::to_string(pos_) + ")");
    }
    std::string_view out(data_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::uint64_t le(int n) {
    std::string_view b = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  const std::string &data_;
  const std::filesystem::path &path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_table(const Table &table, const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw StorageError(StorageError::Kind::Io, "cannot open '" + path.string() + "' for writing");
  Writer w(os);
  os.write(kMagic, 4);
  w.u8(kFormatVersion);
  const auto &cols = table.schema().columns;
  w.u32(static_cast<std::uint32_t>(cols.size()));
  for (const auto &c : cols) {
    w.bytes(c.name);
    w.u8(static_cast<std::uint8_t>(c.type));
  }
  w.u64(static_cast<std::uint64_t>(table.row_count()));
  for (std::int64_t r = 0; r < table.row_count(); ++r) {
    for (std::int32_t c = 0; c < table.column_count(); ++c) {
      const qj_value &cell = table.cell(r, c);
      w.u8(static_cast<std::uint8_t>(cell.type));
      switch (cell.type) {
        case QJ_INT: w.u64(static_cast<std::uint64_t>(cell.u.i)); break;
        case QJ_REAL: w.u64(std::bit_cast<std::uint64_t>(cell.u.r)); break;
        case QJ_TEXT: w.bytes(std::string_view(cell.u.z, cell.n)); break;
        default: break;
      }
    }
  }
  if (!os.flush()) throw StorageError(StorageError::Kind::Io, "write to '" + path.string() + "' failed");
}

Table load_table(const std::filesystem::path &path, std::string name) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StorageError(StorageError::Kind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  std::string data = buf.str();
  Reader r(data, path);

  if (r.take(std::min<std::size_t>(4, data.size())) != std::string_view(kMagic, 4)) {
    throw StorageError(StorageError::Kind::Format, path.string() + ": not a QJDB file (bad magic)");
  }
  std::uint8_t version = r.u8();
  if (version != kFormatVersion) {
    throw StorageError(StorageError::Kind::Format,
                       path.string() + ": unsupported format version " + std::to_string(version));
  }
  TableSchema schema;
  std::uint32_t ncol = r.u32();
  for (std::uint32_t i = 0; i < ncol; ++i) {
    ColumnDef c;
    c.name = r.bytes();
    std::uint8_t tag = r.u8();
    if (tag < 1 || tag > 4) {
      throw StorageError(StorageError::Kind::Format, path.string() + ": bad column type tag " + std::to_string(tag));
    }
    c.type = static_cast<ColumnType>(tag);
    schema.columns.push_back(std::move(c));
  }
  schema.name = std::move(name);
  std::uint64_t nrow = r.u64();
  Table table(std::move(schema));
  std::vector<Value> row(ncol);
  for (std::uint64_t i = 0; i < nrow; ++i) {
    for (std::uint32_t c = 0; c < ncol; ++c) {
      std::uint8_t tag = r.u8();
      switch (tag) {
        case QJ_NULL: row[c] = Value::null(); break;
        case QJ_INT: row[c] = Value::integer(static_cast<std::int64_t>(r.u64())); break;
        case QJ_REAL: row[c] = Value::real(std::bit_cast<double>(r.u64())); break;
        case QJ_TEXT: row[c] = Value::text(r.bytes()); break;
        default:
          throw StorageError(StorageError::Kind::Format, path.string() + ": bad value tag " + std::to_string(tag));
      }
    }
    table.append_row(row);
  }
  if (!r.at_end()) throw StorageError(StorageError::Kind::Format, path.string() + ": trailing bytes after table");
  return table;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Table parse_csv(std::string_view text, const TableSchema &schema) {
  Table table(schema);
  std::int64_t line_no = 0;
  std::size_t pos = 0;
  std::vector<Value> row(schema.columns.size());
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != schema.columns.size()) {
      throw StorageError(StorageError::Kind::Parse,
                         "row " + std::to_string(line_no) + ": expected " + std::to_string(schema.columns.size()) +
                             " fields, found " + std::to_string(fields.size()),
                         line_no, -1);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::string_view f = fields[c];
      auto fail = [&](std::string_view want) {
        throw StorageError(StorageError::Kind::Parse,
                           "row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) + ": '" +
                               std::string(f) + "' is not " + std::string(want),
                           line_no, static_cast<int>(c + 1));
      };
      if (f.empty()) {
        row[c] = Value::null();
        continue;
      }
      switch (schema.columns[c].type) {
        case ColumnType::Int:
          if (auto v = parse_int(f)) row[c] = Value::integer(*v);
          else fail("an integer");
          break;
        case ColumnType::Real:
          if (auto v = parse_real(f)) row[c] = Value::real(*v);
          else fail("a number");
          break;
        case ColumnType::Text:
          row[c] = Value::text(std::string(f));
          break;
        case ColumnType::Any:
          if (auto i = parse_int(f)) row[c] = Value::integer(*i);
          else if (auto r = parse_real(f)) row[c] = Value::real(*r);
          else row[c] = Value::text(std::string(f));
          break;
      }
    }
    table.append_row(row);
  }
  return table;
}

Table import_csv(const std::filesystem::path &path, const TableSchema &schema) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StorageError(StorageError::Kind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_csv(buf.str(), schema);
}

}  // namespace qjit

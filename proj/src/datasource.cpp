// Copyright 2026 The Mirror Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mirror/datasource.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "mirror/csv.hpp"
#include "mirror/hash.hpp"

namespace mirror::datasource {
namespace {

struct ConnectionCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
using Connection = std::unique_ptr<sqlite3, ConnectionCloser>;

struct StatementFinalizer {
  void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};
using Statement = std::unique_ptr<sqlite3_stmt, StatementFinalizer>;

Connection open_connection(const std::filesystem::path& path, int flags) {
  sqlite3* raw = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &raw, flags | SQLITE_OPEN_NOMUTEX,
                                 nullptr);
  Connection db(raw);
  if (rc != SQLITE_OK) {
    throw DataSourceError(DataSourceErrorKind::kUnreachable,
                          "cannot open " + path.string() + ": " +
                              (raw ? sqlite3_errmsg(raw) : sqlite3_errstr(rc)));
  }
  sqlite3_extended_result_codes(db.get(), 1);
  return db;
}

Statement prepare(sqlite3* db, std::string_view sql) {
  sqlite3_stmt* raw = nullptr;
  const int rc = sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()),
                                    &raw, nullptr);
  if (rc != SQLITE_OK) {
    throw std::runtime_error(sqlite3_errmsg(db));
  }
  return Statement(raw);
}

void exec_or_throw(sqlite3* db, const std::string& sql) {
  char* error = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &error) != SQLITE_OK) {
    std::string message = error ? error : "unknown error";
    sqlite3_free(error);
    throw DataSourceError(DataSourceErrorKind::kParseFailure, message);
  }
}

std::string quote_identifier(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string column_text(sqlite3_stmt* stmt, int index) {
  const auto* text = sqlite3_column_text(stmt, index);
  return text ? reinterpret_cast<const char*>(text) : "";
}

std::string normalize_type(std::string_view declared) {
  std::string out;
  bool pending_space = false;
  for (char c : declared) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

// SQLite type affinity of a declared type.
TypeTag affinity_of(std::string_view declared) {
  const std::string upper = normalize_type(declared);
  if (upper.find("INT") != std::string::npos) return TypeTag::kInteger;
  if (upper.find("CHAR") != std::string::npos || upper.find("CLOB") != std::string::npos ||
      upper.find("TEXT") != std::string::npos) {
    return TypeTag::kText;
  }
  if (upper.find("BLOB") != std::string::npos) return TypeTag::kBlob;
  if (upper.find("REAL") != std::string::npos || upper.find("FLOA") != std::string::npos ||
      upper.find("DOUB") != std::string::npos) {
    return TypeTag::kReal;
  }
  return TypeTag::kText;
}

std::string hex_of(const void* data, int size) {
  static constexpr char kHex[] = "0123456789abcdef";
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::string out;
  out.reserve(static_cast<std::size_t>(size) * 2);
  for (int i = 0; i < size; ++i) {
    out.push_back(kHex[bytes[i] >> 4]);
    out.push_back(kHex[bytes[i] & 0x0f]);
  }
  return out;
}

std::string real_to_text(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  std::string out(buffer, ptr);
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

ExecutionErrorKind classify_engine_error(int code, std::string_view message) {
  if (code == SQLITE_INTERRUPT) return ExecutionErrorKind::kTimeout;
  if (message.find("no such table") != std::string_view::npos ||
      message.find("no such column") != std::string_view::npos ||
      message.find("no such function") != std::string_view::npos ||
      message.find("no such collation") != std::string_view::npos ||
      message.find("no such window") != std::string_view::npos) {
    return ExecutionErrorKind::kMissingRelation;
  }
  if (message.find("syntax error") != std::string_view::npos ||
      message.find("incomplete input") != std::string_view::npos ||
      message.find("unrecognized token") != std::string_view::npos ||
      message.find("wrong number of arguments") != std::string_view::npos ||
      message.find("misuse of") != std::string_view::npos ||
      message.find("ambiguous column") != std::string_view::npos) {
    return ExecutionErrorKind::kSyntax;
  }
  if ((code & 0xff) == SQLITE_MISMATCH || message.find("mismatch") != std::string_view::npos ||
      message.find("malformed JSON") != std::string_view::npos) {
    return ExecutionErrorKind::kTypeError;
  }
  return ExecutionErrorKind::kOther;
}

// Only plain reads reach the engine.
int read_only_authorizer(void*, int action, const char*, const char*, const char*,
                         const char*) {
  switch (action) {
    case SQLITE_SELECT:
    case SQLITE_READ:
    case SQLITE_FUNCTION:
    case SQLITE_RECURSIVE:
      return SQLITE_OK;
    default:
      return SQLITE_DENY;
  }
}

struct Deadline {
  std::chrono::steady_clock::time_point at;
};

int deadline_handler(void* arg) {
  const auto* deadline = static_cast<const Deadline*>(arg);
  return std::chrono::steady_clock::now() >= deadline->at ? 1 : 0;
}

std::filesystem::path make_temp_directory() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto candidate =
        base / ("mirror-csv-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    if (std::filesystem::create_directory(candidate)) return candidate;
  }
  throw DataSourceError(DataSourceErrorKind::kUnreachable,
                        "cannot create temporary directory");
}

void load_csv_into(sqlite3* db, const csv::CsvDocument& doc, const std::string& table) {
  const std::vector<std::string> names = csv::unique_column_names(doc.header);
  std::vector<TypeTag> types;
  std::string ddl = "CREATE TABLE " + quote_identifier(table) + " (";
  for (std::size_t c = 0; c < names.size(); ++c) {
    types.push_back(csv::infer_column_type(doc, c));
    if (c > 0) ddl += ", ";
    ddl += quote_identifier(names[c]) + " " + std::string(to_string(types[c]));
  }
  ddl += ")";
  exec_or_throw(db, ddl);

  std::string insert = "INSERT INTO " + quote_identifier(table) + " VALUES (";
  for (std::size_t c = 0; c < names.size(); ++c) insert += c == 0 ? "?" : ", ?";
  insert += ")";

  exec_or_throw(db, "BEGIN");
  Statement stmt = prepare(db, insert);
  for (const auto& row : doc.rows) {
    sqlite3_reset(stmt.get());
    for (std::size_t c = 0; c < row.size(); ++c) {
      const int index = static_cast<int>(c) + 1;
      const std::string& cell = row[c];
      if (cell.empty()) {
        sqlite3_bind_null(stmt.get(), index);
        continue;
      }
      switch (types[c]) {
        case TypeTag::kInteger: {
          std::int64_t value = 0;
          const char* begin = cell.data() + (cell.front() == '+' ? 1 : 0);
          std::from_chars(begin, cell.data() + cell.size(), value);
          sqlite3_bind_int64(stmt.get(), index, value);
          break;
        }
        case TypeTag::kReal:
          sqlite3_bind_double(stmt.get(), index, std::strtod(cell.c_str(), nullptr));
          break;
        default:
          sqlite3_bind_text(stmt.get(), index, cell.data(), static_cast<int>(cell.size()),
                            SQLITE_TRANSIENT);
          break;
      }
    }
    if (sqlite3_step(stmt.get()) != SQLITE_DONE) {
      throw DataSourceError(DataSourceErrorKind::kParseFailure, sqlite3_errmsg(db));
    }
  }
  stmt.reset();
  exec_or_throw(db, "COMMIT");
}

}  // namespace

// ---------------------------------------------------------------------------
// enum names

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kEmbeddedFile:
      return "embedded-file";
    case SourceKind::kNetworkedRelational:
      return "networked-relational";
    case SourceKind::kCsv:
      return "csv";
  }
  return "embedded-file";
}

std::optional<SourceKind> source_kind_from_string(std::string_view text) {
  for (auto kind : {SourceKind::kEmbeddedFile, SourceKind::kNetworkedRelational,
                    SourceKind::kCsv}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(TypeTag tag) {
  switch (tag) {
    case TypeTag::kInteger:
      return "INTEGER";
    case TypeTag::kReal:
      return "REAL";
    case TypeTag::kText:
      return "TEXT";
    case TypeTag::kBlob:
      return "BLOB";
  }
  return "TEXT";
}

std::optional<TypeTag> type_tag_from_string(std::string_view text) {
  for (auto tag : {TypeTag::kInteger, TypeTag::kReal, TypeTag::kText, TypeTag::kBlob}) {
    if (to_string(tag) == text) return tag;
  }
  return std::nullopt;
}

std::string_view to_string(DataSourceErrorKind kind) {
  switch (kind) {
    case DataSourceErrorKind::kUnreachable:
      return "unreachable";
    case DataSourceErrorKind::kParseFailure:
      return "parse-failure";
    case DataSourceErrorKind::kDuplicateId:
      return "duplicate-id";
    case DataSourceErrorKind::kRaggedRows:
      return "ragged-rows";
    case DataSourceErrorKind::kEmptyFile:
      return "empty-file";
  }
  return "unreachable";
}

std::string_view to_string(ExecutionErrorKind kind) {
  switch (kind) {
    case ExecutionErrorKind::kSyntax:
      return "syntax";
    case ExecutionErrorKind::kMissingRelation:
      return "missing-relation";
    case ExecutionErrorKind::kTypeError:
      return "type-error";
    case ExecutionErrorKind::kTimeout:
      return "timeout";
    case ExecutionErrorKind::kOther:
      return "other";
  }
  return "other";
}

std::optional<ExecutionErrorKind> execution_error_kind_from_string(std::string_view text) {
  for (auto kind : {ExecutionErrorKind::kSyntax, ExecutionErrorKind::kMissingRelation,
                    ExecutionErrorKind::kTypeError, ExecutionErrorKind::kTimeout,
                    ExecutionErrorKind::kOther}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

bool cell_conforms(const Cell& cell, TypeTag tag) {
  if (std::holds_alternative<std::monostate>(cell)) return true;
  switch (tag) {
    case TypeTag::kInteger:
      return std::holds_alternative<std::int64_t>(cell);
    case TypeTag::kReal:
      return std::holds_alternative<double>(cell);
    case TypeTag::kText:
    case TypeTag::kBlob:
      return std::holds_alternative<std::string>(cell);
  }
  return false;
}

// ---------------------------------------------------------------------------
// fingerprint

std::string compute_fingerprint(const std::vector<TableMeta>& tables) {
  // Length-prefixed fields so no two schemas share a serialization.
  std::string canonical;
  auto field = [&canonical](std::string_view value) {
    canonical += std::to_string(value.size());
    canonical.push_back(':');
    canonical.append(value);
  };
  for (const auto& table : tables) {
    field("table");
    field(table.name);
    for (const auto& column : table.columns) {
      field("column");
      field(column.name);
      field(column.sql_type);
      field(column.nullable ? "null" : "notnull");
    }
    for (const auto& key : table.primary_key) {
      field("pk");
      field(key);
    }
    for (const auto& fk : table.foreign_keys) {
      field("fk");
      field(fk.column);
      field(fk.foreign_table);
      field(fk.foreign_column);
    }
  }
  return sha256_hex(canonical);
}

// ---------------------------------------------------------------------------
// CSV

std::string sanitize_table_name(std::string_view stem) {
  std::string out;
  for (char c : stem) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) || c == '_' ? c : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) {
    out.insert(out.begin(), '_');
  }
  std::string lower = out;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.rfind("sqlite_", 0) == 0) out.insert(out.begin(), '_');
  return out;
}

std::shared_ptr<DataSource> ingest_csv(const std::filesystem::path& path,
                                       std::string_view table_name,
                                       DataSourceConfig config) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw DataSourceError(DataSourceErrorKind::kUnreachable,
                          "CSV file not found: " + path.string());
  }
  const csv::CsvDocument doc = csv::read_file(path);
  const std::string table = sanitize_table_name(table_name);

  const auto directory = make_temp_directory();
  const auto database = directory / "ingest.sqlite";
  try {
    Connection db = open_connection(database, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
    load_csv_into(db.get(), doc, table);
  } catch (...) {
    std::filesystem::remove_all(directory, ec);
    throw;
  }
  if (config.id.empty()) config.id = table;
  config.kind = SourceKind::kCsv;
  if (config.location.empty()) config.location = path.string();
  config.read_only = true;
  return std::shared_ptr<DataSource>(new DataSource(std::move(config), database, directory));
}

// ---------------------------------------------------------------------------
// DataSource

DataSource::DataSource(DataSourceConfig config, std::filesystem::path database_path,
                       std::optional<std::filesystem::path> owned_directory)
    : config_(std::move(config)),
      database_path_(std::move(database_path)),
      owned_directory_(std::move(owned_directory)) {}

DataSource::~DataSource() {
  if (owned_directory_) {
    std::error_code ec;
    std::filesystem::remove_all(*owned_directory_, ec);
  }
}

std::shared_ptr<DataSource> DataSource::open(DataSourceConfig config) {
  if (config.row_limit == 0) config.row_limit = kDefaultRowLimit;
  config.read_only = true;
  switch (config.kind) {
    case SourceKind::kCsv: {
      const std::filesystem::path path(config.location);
      return ingest_csv(path, path.stem().string(), std::move(config));
    }
    case SourceKind::kNetworkedRelational: {
      std::string_view location = config.location;
      std::string file;
      if (location.rfind("sqlite://", 0) == 0) {
        file = std::string(location.substr(9));
      } else if (location.rfind("file:", 0) == 0) {
        file = std::string(location.substr(5));
      } else {
        throw DataSourceError(DataSourceErrorKind::kUnreachable,
                              "no driver available for connection string '" +
                                  config.location + "'");
      }
      std::error_code ec;
      if (!std::filesystem::is_regular_file(file, ec)) {
        throw DataSourceError(DataSourceErrorKind::kUnreachable,
                              "database not found: " + file);
      }
      Connection probe = open_connection(file, SQLITE_OPEN_READONLY);
      return std::shared_ptr<DataSource>(new DataSource(std::move(config), file, std::nullopt));
    }
    case SourceKind::kEmbeddedFile: {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(config.location, ec)) {
        throw DataSourceError(DataSourceErrorKind::kUnreachable,
                              "database file not found: " + config.location);
      }
      Connection probe = open_connection(config.location, SQLITE_OPEN_READONLY);
      // Rejects files that are not SQLite databases.
      try {
        Statement stmt = prepare(probe.get(), "SELECT count(*) FROM sqlite_master");
        if (sqlite3_step(stmt.get()) != SQLITE_ROW) {
          throw std::runtime_error(sqlite3_errmsg(probe.get()));
        }
      } catch (const std::runtime_error& e) {
        throw DataSourceError(DataSourceErrorKind::kUnreachable,
                              config.location + ": " + e.what());
      }
      std::filesystem::path path(config.location);
      return std::shared_ptr<DataSource>(
          new DataSource(std::move(config), std::move(path), std::nullopt));
    }
  }
  throw DataSourceError(DataSourceErrorKind::kUnreachable, "unknown data source kind");
}

SchemaMetadata DataSource::introspect() const {
  Connection db = open_connection(database_path_, SQLITE_OPEN_READONLY);
  SchemaMetadata meta;
  try {
    Statement tables = prepare(
        db.get(),
        "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite\\_%' "
        "ESCAPE '\\' ORDER BY name");
    std::vector<std::string> names;
    while (sqlite3_step(tables.get()) == SQLITE_ROW) {
      names.push_back(column_text(tables.get(), 0));
    }
    // Byte order, independent of SQLite collation settings.
    std::sort(names.begin(), names.end());

    for (const auto& name : names) {
      TableMeta table;
      table.name = name;
      Statement info = prepare(db.get(), "SELECT name, type, \"notnull\", pk FROM "
                                         "pragma_table_info(?1) ORDER BY cid");
      sqlite3_bind_text(info.get(), 1, name.c_str(), -1, SQLITE_TRANSIENT);
      std::vector<std::pair<int, std::string>> pk;
      while (sqlite3_step(info.get()) == SQLITE_ROW) {
        ColumnMeta column;
        column.name = column_text(info.get(), 0);
        column.sql_type = normalize_type(column_text(info.get(), 1));
        column.nullable = sqlite3_column_int(info.get(), 2) == 0;
        const int pk_index = sqlite3_column_int(info.get(), 3);
        if (pk_index > 0) pk.emplace_back(pk_index, column.name);
        table.columns.push_back(std::move(column));
      }
      std::sort(pk.begin(), pk.end());
      for (auto& [index, column] : pk) table.primary_key.push_back(column);

      Statement fks = prepare(db.get(), "SELECT \"from\", \"table\", \"to\" FROM "
                                        "pragma_foreign_key_list(?1) ORDER BY id, seq");
      sqlite3_bind_text(fks.get(), 1, name.c_str(), -1, SQLITE_TRANSIENT);
      while (sqlite3_step(fks.get()) == SQLITE_ROW) {
        ForeignKey fk;
        fk.column = column_text(fks.get(), 0);
        fk.foreign_table = column_text(fks.get(), 1);
        fk.foreign_column = column_text(fks.get(), 2);
        table.foreign_keys.push_back(std::move(fk));
      }
      meta.tables.push_back(std::move(table));
    }
  } catch (const std::runtime_error& e) {
    throw DataSourceError(DataSourceErrorKind::kUnreachable,
                          std::string("introspection failed: ") + e.what());
  }
  meta.fingerprint = compute_fingerprint(meta.tables);
  return meta;
}

ResultTable DataSource::execute(const sqlguard::ValidatedSql& sql) const {
  Connection db = open_connection(database_path_, SQLITE_OPEN_READONLY);
  sqlite3_set_authorizer(db.get(), read_only_authorizer, nullptr);
  sqlite3_db_config(db.get(), SQLITE_DBCONFIG_ENABLE_LOAD_EXTENSION, 0, nullptr);
  Deadline deadline{std::chrono::steady_clock::now() + config_.timeout};
  sqlite3_progress_handler(db.get(), 1000, deadline_handler, &deadline);

  const std::string& text = sql.text();
  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(db.get(), text.c_str(), static_cast<int>(text.size()), &raw,
                              &tail);
  Statement stmt(raw);
  if (rc != SQLITE_OK) {
    const std::string message = sqlite3_errmsg(db.get());
    throw ExecutionError(classify_engine_error(rc, message), message);
  }
  if (!stmt) {
    throw ExecutionError(ExecutionErrorKind::kSyntax, "empty statement");
  }
  if (!sqlite3_stmt_readonly(stmt.get())) {
    throw ExecutionError(ExecutionErrorKind::kOther, "statement is not read-only");
  }

  const int column_count = sqlite3_column_count(stmt.get());
  ResultTable table;
  std::vector<std::string> declared(static_cast<std::size_t>(column_count));
  for (int c = 0; c < column_count; ++c) {
    const char* name = sqlite3_column_name(stmt.get(), c);
    table.columns.push_back({name ? name : "", TypeTag::kText});
    const char* decl = sqlite3_column_decltype(stmt.get(), c);
    declared[static_cast<std::size_t>(c)] = decl ? decl : "";
  }

  // Storage classes observed per column; see type unification below.
  std::vector<std::set<int>> seen(static_cast<std::size_t>(column_count));
  std::vector<std::vector<std::pair<int, Cell>>> raw_rows;
  while (true) {
    rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) {
      const std::string message = sqlite3_errmsg(db.get());
      throw ExecutionError(classify_engine_error(rc, message), message);
    }
    if (raw_rows.size() == config_.row_limit) {
      table.truncated = true;
      break;
    }
    std::vector<std::pair<int, Cell>> row;
    row.reserve(static_cast<std::size_t>(column_count));
    for (int c = 0; c < column_count; ++c) {
      const int type = sqlite3_column_type(stmt.get(), c);
      Cell cell;
      switch (type) {
        case SQLITE_INTEGER:
          cell = static_cast<std::int64_t>(sqlite3_column_int64(stmt.get(), c));
          break;
        case SQLITE_FLOAT:
          cell = sqlite3_column_double(stmt.get(), c);
          break;
        case SQLITE_TEXT:
          cell = column_text(stmt.get(), c);
          break;
        case SQLITE_BLOB:
          cell = hex_of(sqlite3_column_blob(stmt.get(), c), sqlite3_column_bytes(stmt.get(), c));
          break;
        default:
          break;
      }
      if (type != SQLITE_NULL) seen[static_cast<std::size_t>(c)].insert(type);
      row.emplace_back(type, std::move(cell));
    }
    raw_rows.push_back(std::move(row));
  }

  for (int c = 0; c < column_count; ++c) {
    const auto& classes = seen[static_cast<std::size_t>(c)];
    TypeTag tag;
    if (classes.empty()) {
      tag = declared[static_cast<std::size_t>(c)].empty()
                ? TypeTag::kText
                : affinity_of(declared[static_cast<std::size_t>(c)]);
    } else if (classes == std::set<int>{SQLITE_INTEGER}) {
      tag = TypeTag::kInteger;
    } else if (classes == std::set<int>{SQLITE_FLOAT} ||
               classes == std::set<int>{SQLITE_INTEGER, SQLITE_FLOAT}) {
      tag = TypeTag::kReal;
    } else if (classes == std::set<int>{SQLITE_BLOB}) {
      tag = TypeTag::kBlob;
    } else {
      tag = TypeTag::kText;
    }
    table.columns[static_cast<std::size_t>(c)].type = tag;
  }

  table.rows.reserve(raw_rows.size());
  for (auto& raw_row : raw_rows) {
    std::vector<Cell> row;
    row.reserve(raw_row.size());
    for (std::size_t c = 0; c < raw_row.size(); ++c) {
      Cell& cell = raw_row[c].second;
      const TypeTag tag = table.columns[c].type;
      if (tag == TypeTag::kReal && std::holds_alternative<std::int64_t>(cell)) {
        cell = static_cast<double>(std::get<std::int64_t>(cell));
      } else if (tag == TypeTag::kText) {
        if (const auto* i = std::get_if<std::int64_t>(&cell)) {
          cell = std::to_string(*i);
        } else if (const auto* d = std::get_if<double>(&cell)) {
          cell = real_to_text(*d);
        }
      }
      row.push_back(std::move(cell));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Registry

DataSourceHandle Registry::register_source(DataSourceConfig config) {
  std::lock_guard lock(mutex_);
  if (config.id.empty()) {
    throw DataSourceError(DataSourceErrorKind::kUnreachable, "data source id is empty");
  }
  if (sources_.contains(config.id)) {
    throw DataSourceError(DataSourceErrorKind::kDuplicateId,
                          "data source id already registered: " + config.id);
  }
  const std::string id = config.id;
  DataSourceHandle handle = DataSource::open(std::move(config));
  sources_.emplace(id, handle);
  return handle;
}

DataSourceHandle Registry::find(std::string_view id) const {
  std::lock_guard lock(mutex_);
  const auto it = sources_.find(id);
  return it == sources_.end() ? nullptr : it->second;
}

std::vector<DataSourceHandle> Registry::list() const {
  std::lock_guard lock(mutex_);
  std::vector<DataSourceHandle> out;
  for (const auto& [id, handle] : sources_) out.push_back(handle);
  return out;
}

bool Registry::contains(std::string_view id) const {
  std::lock_guard lock(mutex_);
  return sources_.find(id) != sources_.end();
}

}  // namespace mirror::datasource

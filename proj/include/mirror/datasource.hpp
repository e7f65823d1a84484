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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mirror/sql_guard.hpp"

namespace mirror::datasource {

enum class SourceKind { kEmbeddedFile, kNetworkedRelational, kCsv };

std::string_view to_string(SourceKind kind);
std::optional<SourceKind> source_kind_from_string(std::string_view text);

inline constexpr std::size_t kDefaultRowLimit = 1000;
inline constexpr std::chrono::milliseconds kDefaultQueryTimeout{30'000};

struct DataSourceConfig {
  std::string id;
  SourceKind kind = SourceKind::kEmbeddedFile;
  // File path for embedded/csv sources, connection string otherwise.
  std::string location;
  bool read_only = true;
  std::size_t row_limit = kDefaultRowLimit;
  std::chrono::milliseconds timeout = kDefaultQueryTimeout;

  bool operator==(const DataSourceConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Schema metadata

struct ColumnMeta {
  std::string name;
  // Declared type, upper-cased with whitespace collapsed; empty when the
  // column was declared without a type.
  std::string sql_type;
  bool nullable = true;

  bool operator==(const ColumnMeta&) const = default;
};

struct ForeignKey {
  std::string column;
  std::string foreign_table;
  std::string foreign_column;

  bool operator==(const ForeignKey&) const = default;
};

struct TableMeta {
  std::string name;
  std::vector<ColumnMeta> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  bool operator==(const TableMeta&) const = default;
};

struct SchemaMetadata {
  std::vector<TableMeta> tables;  // sorted by name
  std::string fingerprint;

  bool operator==(const SchemaMetadata&) const = default;
};

// Hash over names, types, nullability and keys; independent of the stored
// fingerprint field.
std::string compute_fingerprint(const std::vector<TableMeta>& tables);

// ---------------------------------------------------------------------------
// Results

enum class TypeTag { kInteger, kReal, kText, kBlob };

std::string_view to_string(TypeTag tag);
std::optional<TypeTag> type_tag_from_string(std::string_view text);

// Null, INTEGER, REAL or TEXT. BLOB cells are carried as lowercase hex text.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct ResultColumn {
  std::string name;
  TypeTag type = TypeTag::kText;

  bool operator==(const ResultColumn&) const = default;
};

struct ResultTable {
  std::vector<ResultColumn> columns;
  std::vector<std::vector<Cell>> rows;
  bool truncated = false;

  bool operator==(const ResultTable&) const = default;
};

bool cell_conforms(const Cell& cell, TypeTag tag);

// ---------------------------------------------------------------------------
// Errors

enum class DataSourceErrorKind {
  kUnreachable,
  kParseFailure,
  kDuplicateId,
  kRaggedRows,
  kEmptyFile,
};

std::string_view to_string(DataSourceErrorKind kind);

class DataSourceError : public std::runtime_error {
 public:
  DataSourceError(DataSourceErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  DataSourceErrorKind kind() const { return kind_; }

 private:
  DataSourceErrorKind kind_;
};

enum class ExecutionErrorKind { kSyntax, kMissingRelation, kTypeError, kTimeout, kOther };

std::string_view to_string(ExecutionErrorKind kind);
std::optional<ExecutionErrorKind> execution_error_kind_from_string(std::string_view text);

class ExecutionError : public std::runtime_error {
 public:
  // `engine_message` is the database engine's message, verbatim.
  ExecutionError(ExecutionErrorKind kind, std::string engine_message)
      : std::runtime_error(engine_message),
        kind_(kind),
        engine_message_(std::move(engine_message)) {}
  ExecutionErrorKind kind() const { return kind_; }
  const std::string& engine_message() const { return engine_message_; }

 private:
  ExecutionErrorKind kind_;
  std::string engine_message_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

// Sanitizes `stem` to [A-Za-z_][A-Za-z0-9_]*.
std::string sanitize_table_name(std::string_view stem);

class DataSource;

// Creates a temporary embedded database holding `path` as `table_name`
// (sanitized). Column types: INTEGER if every non-empty cell is a decimal
// integer, else REAL if every non-empty cell is a decimal float, else TEXT;
// empty cells are NULL.
std::shared_ptr<DataSource> ingest_csv(const std::filesystem::path& path,
                                       std::string_view table_name,
                                       DataSourceConfig config = {});

// ---------------------------------------------------------------------------
// Handles

class DataSource {
 public:
  ~DataSource();
  DataSource(const DataSource&) = delete;
  DataSource& operator=(const DataSource&) = delete;

  // Opens the source described by `config`. For csv sources, ingests the file
  // into a temporary embedded database whose single table is named after the
  // file stem.
  static std::shared_ptr<DataSource> open(DataSourceConfig config);

  const DataSourceConfig& config() const { return config_; }
  const std::string& id() const { return config_.id; }
  // Path of the embedded database file backing this source.
  const std::filesystem::path& database_path() const { return database_path_; }

  SchemaMetadata introspect() const;

  // Runs validated SQL on a fresh read-only connection. Returns at most
  // config().row_limit rows. Throws ExecutionError.
  ResultTable execute(const sqlguard::ValidatedSql& sql) const;

 private:
  friend std::shared_ptr<DataSource> ingest_csv(const std::filesystem::path&,
                                                std::string_view, DataSourceConfig);
  DataSource(DataSourceConfig config, std::filesystem::path database_path,
             std::optional<std::filesystem::path> owned_directory);

  DataSourceConfig config_;
  std::filesystem::path database_path_;
  // Temporary directory removed on destruction (csv sources).
  std::optional<std::filesystem::path> owned_directory_;
};

using DataSourceHandle = std::shared_ptr<DataSource>;

// Thread-safe id -> handle map.
class Registry {
 public:
  // Throws DataSourceError{duplicate-id} if the id is taken.
  DataSourceHandle register_source(DataSourceConfig config);
  DataSourceHandle find(std::string_view id) const;
  std::vector<DataSourceHandle> list() const;
  bool contains(std::string_view id) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, DataSourceHandle, std::less<>> sources_;
};

}  // namespace mirror::datasource

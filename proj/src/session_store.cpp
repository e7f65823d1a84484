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

#include "mirror/session_store.hpp"

#include <sqlite3.h>

namespace mirror::server {
namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError(std::string("store: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, const std::string& value) {
    sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()),
                      SQLITE_TRANSIENT);
    return *this;
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError(std::string("store: ") + sqlite3_errmsg(db_));
  }

  std::string text(int column) const {
    const auto* data = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, column));
    const int size = sqlite3_column_bytes(stmt_, column);
    return data == nullptr ? std::string() : std::string(data, static_cast<std::size_t>(size));
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

SessionStore::SessionStore(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                      nullptr) != SQLITE_OK) {
    const std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw StoreError("cannot open store " + path.string() + ": " + message);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA synchronous=FULL");
  exec(
      "CREATE TABLE IF NOT EXISTS sessions ("
      " seq INTEGER PRIMARY KEY AUTOINCREMENT,"
      " id TEXT NOT NULL UNIQUE,"
      " record TEXT NOT NULL)");
  exec(
      "CREATE TABLE IF NOT EXISTS datasources ("
      " seq INTEGER PRIMARY KEY AUTOINCREMENT,"
      " id TEXT NOT NULL UNIQUE,"
      " config TEXT NOT NULL)");
  exec(
      "CREATE TABLE IF NOT EXISTS templates ("
      " scope TEXT NOT NULL,"
      " kind TEXT NOT NULL,"
      " template TEXT NOT NULL,"
      " PRIMARY KEY (scope, kind))");
}

SessionStore::~SessionStore() { sqlite3_close(db_); }

void SessionStore::exec(const char* sql) {
  char* error = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &error) != SQLITE_OK) {
    const std::string message = error ? error : "unknown error";
    sqlite3_free(error);
    throw StoreError("store: " + message);
  }
}

void SessionStore::put_session(const std::string& id, const std::string& record) {
  std::lock_guard lock(mutex_);
  Statement stmt(db_,
                 "INSERT INTO sessions (id, record) VALUES (?1, ?2)"
                 " ON CONFLICT(id) DO UPDATE SET record = excluded.record");
  stmt.bind(1, id).bind(2, record).step();
}

std::optional<std::string> SessionStore::get_session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  Statement stmt(db_, "SELECT record FROM sessions WHERE id = ?1");
  stmt.bind(1, id);
  if (!stmt.step()) return std::nullopt;
  return stmt.text(0);
}

std::vector<std::pair<std::string, std::string>> SessionStore::sessions() const {
  std::lock_guard lock(mutex_);
  Statement stmt(db_, "SELECT id, record FROM sessions ORDER BY seq");
  std::vector<std::pair<std::string, std::string>> out;
  while (stmt.step()) out.emplace_back(stmt.text(0), stmt.text(1));
  return out;
}

void SessionStore::put_datasource(const std::string& id, const std::string& config) {
  std::lock_guard lock(mutex_);
  Statement stmt(db_,
                 "INSERT INTO datasources (id, config) VALUES (?1, ?2)"
                 " ON CONFLICT(id) DO UPDATE SET config = excluded.config");
  stmt.bind(1, id).bind(2, config).step();
}

std::vector<std::pair<std::string, std::string>> SessionStore::datasources() const {
  std::lock_guard lock(mutex_);
  Statement stmt(db_, "SELECT id, config FROM datasources ORDER BY seq");
  std::vector<std::pair<std::string, std::string>> out;
  while (stmt.step()) out.emplace_back(stmt.text(0), stmt.text(1));
  return out;
}

void SessionStore::put_template(const std::string& scope, const std::string& kind,
                                const std::string& tmpl) {
  std::lock_guard lock(mutex_);
  Statement stmt(db_,
                 "INSERT INTO templates (scope, kind, template) VALUES (?1, ?2, ?3)"
                 " ON CONFLICT(scope, kind) DO UPDATE SET template = excluded.template");
  stmt.bind(1, scope).bind(2, kind).bind(3, tmpl).step();
}

std::vector<std::pair<std::pair<std::string, std::string>, std::string>>
SessionStore::templates() const {
  std::lock_guard lock(mutex_);
  Statement stmt(db_, "SELECT scope, kind, template FROM templates ORDER BY scope, kind");
  std::vector<std::pair<std::pair<std::string, std::string>, std::string>> out;
  while (stmt.step()) out.push_back({{stmt.text(0), stmt.text(1)}, stmt.text(2)});
  return out;
}

}  // namespace mirror::server

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

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

struct sqlite3;

namespace mirror::server {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Embedded on-disk store for session records, registered data sources and
// template overrides. Values are opaque JSON text stored and returned
// byte-for-byte. Every write is its own durable transaction.
class SessionStore {
 public:
  explicit SessionStore(const std::filesystem::path& path);
  ~SessionStore();
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  void put_session(const std::string& id, const std::string& record);
  std::optional<std::string> get_session(const std::string& id) const;
  // (id, record) pairs in insertion order.
  std::vector<std::pair<std::string, std::string>> sessions() const;

  void put_datasource(const std::string& id, const std::string& config);
  std::vector<std::pair<std::string, std::string>> datasources() const;

  // Keyed by (scope, kind); scope is a data source id or "" for all sources.
  void put_template(const std::string& scope, const std::string& kind,
                    const std::string& tmpl);
  std::vector<std::pair<std::pair<std::string, std::string>, std::string>> templates() const;

 private:
  void exec(const char* sql);

  mutable std::mutex mutex_;
  sqlite3* db_ = nullptr;
};

}  // namespace mirror::server

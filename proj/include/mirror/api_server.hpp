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

#include <memory>
#include <stdexcept>

#include "mirror/llm_provider.hpp"
#include "mirror/server_config.hpp"

namespace mirror::server {

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON-over-HTTP service for data sources, query sessions, autocompletion and
// templates. Sessions run on worker threads; GET returns the latest published
// snapshot, which is also what the store holds.
//
// Endpoints:
//   GET  /api/health
//   GET  /api/datasources                  POST /api/datasources
//   GET  /api/datasources/{id}/schema
//   POST /api/query                        GET  /api/sessions
//   GET  /api/sessions/{id}
//   POST /api/sessions/{id}/sql            POST /api/sessions/{id}/edit
//   GET  /api/autocomplete?datasource=&q=
//   GET  /api/templates?datasource=        PUT  /api/templates
class ApiServer {
 public:
  // Registers configured sources and reloads persisted state. Throws
  // ConfigError for a configured source that cannot be opened and StoreError
  // when the store is unusable.
  ApiServer(ServerConfig config, std::unique_ptr<llm::Provider> provider);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds the listen socket and returns the bound port. Throws BindError.
  int bind();
  // Serves until stop(). Requires bind().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mirror::server

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
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mirror/datasource.hpp"
#include "mirror/llm_provider.hpp"
#include "mirror/pipeline.hpp"

namespace mirror::server {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProviderSettings {
  // "http" or "scripted".
  std::string kind = "http";
  llm::HttpProviderConfig http;
  std::filesystem::path transcript;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  // 0 binds an ephemeral port.
  int port = 8080;
  ProviderSettings provider;
  pipeline::PipelineOptions pipeline;
  std::size_t row_limit = datasource::kDefaultRowLimit;
  std::chrono::milliseconds query_timeout = datasource::kDefaultQueryTimeout;
  std::filesystem::path store_path = "mirror-store.sqlite";
  // Uploaded CSV files are kept here so they can be re-ingested on restart.
  std::filesystem::path data_dir = "mirror-data";
  std::string cors_origin;
  std::string auth_token;
  std::vector<datasource::DataSourceConfig> datasources;
};

// Relative paths in the file resolve against the file's directory.
// MIRROR_API_KEY overrides provider.api_key. Throws ConfigError.
ServerConfig load_server_config(const std::filesystem::path& path);
ServerConfig parse_server_config(std::string_view json_text,
                                 const std::filesystem::path& base_dir);

// Throws ConfigError for an unknown kind or unreadable transcript.
std::unique_ptr<llm::Provider> make_provider(const ProviderSettings& settings);

// "scripted:<path>" or "http"; the latter keeps `fallback`'s http settings.
ProviderSettings parse_provider_flag(std::string_view flag, const ProviderSettings& fallback);

}  // namespace mirror::server

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

#include "mirror/server_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mirror/serialization.hpp"

namespace mirror::server {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path path(value);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read_if_present(const json& doc, const char* key, T& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

void read_ms_if_present(const json& doc, const char* key, std::chrono::milliseconds& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) {
    out = std::chrono::milliseconds(doc.at(key).get<std::int64_t>());
  }
}

}  // namespace

ServerConfig parse_server_config(std::string_view json_text,
                                 const std::filesystem::path& base_dir) {
  const json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError("config is not a JSON object");
  }
  ServerConfig config;
  try {
    if (doc.contains("listen")) {
      const json& listen = doc.at("listen");
      read_if_present(listen, "host", config.host);
      read_if_present(listen, "port", config.port);
    }
    if (config.port < 0 || config.port > 65535) throw ConfigError("listen.port out of range");

    if (doc.contains("provider")) {
      const json& p = doc.at("provider");
      read_if_present(p, "kind", config.provider.kind);
      read_if_present(p, "endpoint", config.provider.http.base_url);
      read_if_present(p, "completion_path", config.provider.http.completion_path);
      read_if_present(p, "edit_path", config.provider.http.edit_path);
      read_if_present(p, "model", config.provider.http.model);
      read_if_present(p, "edit_model", config.provider.http.edit_model);
      read_if_present(p, "api_key", config.provider.http.api_key);
      read_ms_if_present(p, "timeout_ms", config.provider.http.timeout);
      if (p.contains("transcript")) {
        config.provider.transcript = resolve(base_dir, p.at("transcript").get<std::string>());
      }
    }
    config.provider.http.api_key = llm::api_key_from_environment(config.provider.http.api_key);
    if (config.provider.kind != "http" && config.provider.kind != "scripted") {
      throw ConfigError("provider.kind must be \"http\" or \"scripted\"");
    }

    pipeline::PipelineOptions& options = config.pipeline;
    if (doc.contains("limits")) {
      const json& limits = doc.at("limits");
      read_if_present(limits, "max_retries", options.max_retries);
      read_if_present(limits, "max_chart_retries", options.max_chart_retries);
      read_if_present(limits, "prompt_row_cap", options.prompt_row_cap);
      read_if_present(limits, "chart_row_cap", options.chart_row_cap);
      read_if_present(limits, "row_limit", config.row_limit);
      read_ms_if_present(limits, "query_timeout_ms", config.query_timeout);
    }
    if (options.max_retries == 0) throw ConfigError("limits.max_retries must be positive");
    if (doc.contains("sampling")) {
      const json& sampling = doc.at("sampling");
      read_if_present(sampling, "base_temperature", options.base_temperature);
      read_if_present(sampling, "temperature_step", options.temperature_step);
      read_if_present(sampling, "max_temperature", options.max_temperature);
      read_if_present(sampling, "summary_temperature", options.summary_temperature);
      read_if_present(sampling, "top_p", options.base_params.top_p);
      read_if_present(sampling, "max_output_tokens", options.base_params.max_output_tokens);
      read_if_present(sampling, "stop_sequences", options.base_params.stop_sequences);
    }
    options.base_params.temperature = options.base_temperature;
    try {
      llm::check_params(options.base_params);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sampling: ") + e.what());
    }
    read_if_present(doc, "debug", options.debug);

    if (doc.contains("store_path")) {
      config.store_path = resolve(base_dir, doc.at("store_path").get<std::string>());
    } else {
      config.store_path = resolve(base_dir, config.store_path.string());
    }
    if (doc.contains("data_dir")) {
      config.data_dir = resolve(base_dir, doc.at("data_dir").get<std::string>());
    } else {
      config.data_dir = resolve(base_dir, config.data_dir.string());
    }
    read_if_present(doc, "cors_origin", config.cors_origin);
    read_if_present(doc, "auth_token", config.auth_token);

    if (doc.contains("datasources")) {
      for (const auto& entry : doc.at("datasources")) {
        json adjusted = entry;
        if (!adjusted.contains("row_limit")) adjusted["row_limit"] = config.row_limit;
        if (!adjusted.contains("timeout_ms")) adjusted["timeout_ms"] = config.query_timeout.count();
        auto ds = serialization::datasource_config_from_json(adjusted);
        if (ds.kind != datasource::SourceKind::kNetworkedRelational) {
          ds.location = resolve(base_dir, ds.location).string();
        }
        config.datasources.push_back(std::move(ds));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config;
}

ServerConfig load_server_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_server_config(text.str(), path.parent_path());
}

std::unique_ptr<llm::Provider> make_provider(const ProviderSettings& settings) {
  if (settings.kind == "scripted") {
    if (settings.transcript.empty()) throw ConfigError("scripted provider needs a transcript");
    try {
      return llm::ScriptedProvider::from_file(settings.transcript);
    } catch (const std::exception& e) {
      throw ConfigError("transcript " + settings.transcript.string() + ": " + e.what());
    }
  }
  if (settings.kind == "http") {
    if (settings.http.base_url.empty()) throw ConfigError("http provider needs an endpoint");
    return std::make_unique<llm::HttpProvider>(settings.http);
  }
  throw ConfigError("unknown provider kind '" + settings.kind + "'");
}

ProviderSettings parse_provider_flag(std::string_view flag, const ProviderSettings& fallback) {
  ProviderSettings settings = fallback;
  constexpr std::string_view kScripted = "scripted:";
  if (flag.substr(0, kScripted.size()) == kScripted) {
    settings.kind = "scripted";
    settings.transcript = std::string(flag.substr(kScripted.size()));
    if (settings.transcript.empty()) throw ConfigError("--provider scripted: needs a path");
    return settings;
  }
  if (flag == "http") {
    settings.kind = "http";
    return settings;
  }
  throw ConfigError("--provider must be scripted:<path> or http");
}

}  // namespace mirror::server

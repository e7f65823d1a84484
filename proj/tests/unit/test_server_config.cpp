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

#include <doctest.h>

#include "mirror/server_config.hpp"
#include "test_support.hpp"

using namespace mirror::server;
using mirror::testing::TempDir;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_server_config(text, "/base");
  } catch (const ConfigError& e) {
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

}  // namespace

TEST_CASE("defaults") {
  ::unsetenv("MIRROR_API_KEY");
  const auto config = parse_server_config("{}", "/base");
  CHECK(config.host == "127.0.0.1");
  CHECK(config.port == 8080);
  CHECK(config.provider.kind == "http");
  CHECK(config.pipeline.max_retries == 3);
  CHECK(config.store_path == "/base/mirror-store.sqlite");
  CHECK(config.data_dir == "/base/mirror-data");
  CHECK(config.datasources.empty());
  CHECK(config.cors_origin.empty());
}

TEST_CASE("full document") {
  ::unsetenv("MIRROR_API_KEY");
  const auto config = parse_server_config(R"({
    "listen": {"host": "0.0.0.0", "port": 9000},
    "provider": {"kind": "http", "endpoint": "http://llm:8000", "model": "m", "api_key": "k",
                 "timeout_ms": 1500, "transcript": "t.json"},
    "limits": {"max_retries": 5, "max_chart_retries": 2, "prompt_row_cap": 7, "chart_row_cap": 50,
               "row_limit": 100, "query_timeout_ms": 2000},
    "sampling": {"base_temperature": 0.1, "temperature_step": 0.2, "max_temperature": 0.9,
                 "top_p": 0.95, "max_output_tokens": 256, "stop_sequences": [";"]},
    "debug": true, "store_path": "/abs/store.sqlite", "data_dir": "data",
    "cors_origin": "http://ui", "auth_token": "tok",
    "datasources": [
      {"id": "sports", "kind": "embedded-file", "location": "db/sports.sqlite"},
      {"id": "remote", "kind": "networked-relational", "location": "sqlite://x.db", "row_limit": 3}
    ]
  })", "/base");
  CHECK(config.host == "0.0.0.0");
  CHECK(config.port == 9000);
  CHECK(config.provider.http.base_url == "http://llm:8000");
  CHECK(config.provider.http.api_key == "k");
  CHECK(config.provider.http.timeout == std::chrono::milliseconds(1500));
  CHECK(config.provider.transcript == "/base/t.json");
  CHECK(config.pipeline.max_retries == 5);
  CHECK(config.pipeline.max_chart_retries == 2);
  CHECK(config.pipeline.prompt_row_cap == 7);
  CHECK(config.pipeline.chart_row_cap == 50);
  CHECK(config.pipeline.base_temperature == 0.1);
  CHECK(config.pipeline.base_params.top_p == 0.95);
  CHECK(config.pipeline.base_params.stop_sequences == std::vector<std::string>{";"});
  CHECK(config.pipeline.debug);
  CHECK(config.row_limit == 100);
  CHECK(config.store_path == "/abs/store.sqlite");
  CHECK(config.data_dir == "/base/data");
  CHECK(config.auth_token == "tok");
  REQUIRE(config.datasources.size() == 2);
  CHECK(config.datasources[0].location == "/base/db/sports.sqlite");
  CHECK(config.datasources[0].row_limit == 100);
  CHECK(config.datasources[0].timeout == std::chrono::milliseconds(2000));
  CHECK(config.datasources[1].location == "sqlite://x.db");
  CHECK(config.datasources[1].row_limit == 3);
}

TEST_CASE("environment key wins") {
  ::setenv("MIRROR_API_KEY", "from-env", 1);
  CHECK(parse_server_config(R"({"provider": {"api_key": "file"}})", "").provider.http.api_key ==
        "from-env");
  ::unsetenv("MIRROR_API_KEY");
}

TEST_CASE("invalid documents") {
  CHECK_FALSE(config_error("[]").empty());
  CHECK_FALSE(config_error("{").empty());
  CHECK(config_error(R"({"listen": {"port": 70000}})").find("port") != std::string::npos);
  CHECK(config_error(R"({"provider": {"kind": "magic"}})").find("provider.kind") != std::string::npos);
  CHECK(config_error(R"({"limits": {"max_retries": 0}})").find("max_retries") != std::string::npos);
  CHECK(config_error(R"({"sampling": {"top_p": 2}})").find("sampling") != std::string::npos);
  CHECK_FALSE(config_error(R"({"listen": {"port": "eighty"}})").empty());
  CHECK_FALSE(config_error(R"({"datasources": [{"id": "x", "kind": "mongo", "location": "y"}]})").empty());
}

TEST_CASE("loading from a file resolves relative paths") {
  TempDir dir;
  mirror::testing::write_file(dir / "mirror.json", R"({"store_path": "s.sqlite"})");
  CHECK(load_server_config(dir / "mirror.json").store_path == dir / "s.sqlite");
  CHECK_THROWS_AS(load_server_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("providers") {
  ProviderSettings settings;
  settings.kind = "scripted";
  CHECK_THROWS_AS(make_provider(settings), ConfigError);
  settings.transcript = mirror::testing::fixture_path("transcripts/sports_happy.json");
  CHECK(make_provider(settings)->id() == "scripted");
  settings.transcript = "/nonexistent.json";
  CHECK_THROWS_AS(make_provider(settings), ConfigError);
  settings.kind = "http";
  CHECK_THROWS_AS(make_provider(settings), ConfigError);
  settings.http.base_url = "http://127.0.0.1:1";
  CHECK(make_provider(settings)->id() == "http");

  ProviderSettings fallback;
  fallback.http.base_url = "http://llm";
  const auto scripted = parse_provider_flag("scripted:/tmp/t.json", fallback);
  CHECK(scripted.kind == "scripted");
  CHECK(scripted.transcript == "/tmp/t.json");
  const auto http = parse_provider_flag("http", fallback);
  CHECK(http.kind == "http");
  CHECK(http.http.base_url == "http://llm");
  CHECK_THROWS_AS(parse_provider_flag("scripted:", fallback), ConfigError);
  CHECK_THROWS_AS(parse_provider_flag("openai", fallback), ConfigError);
}

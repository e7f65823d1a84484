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
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <thread>

#include "mirror/session_store.hpp"
#include "test_support.hpp"

using mirror::server::SessionStore;
using mirror::server::StoreError;
using mirror::testing::TempDir;

TEST_CASE("sessions are stored verbatim") {
  TempDir dir;
  SessionStore store(dir / "store.sqlite");
  CHECK_FALSE(store.get_session("a").has_value());
  const std::string odd("{\"k\": \"\xC3\xA9\\u0000\"}\n\0tail", 24);
  store.put_session("a", odd);
  store.put_session("b", "{}");
  CHECK(store.get_session("a") == odd);
  store.put_session("a", "{\"v\": 2}");
  const auto all = store.sessions();
  REQUIRE(all.size() == 2);
  CHECK(all[0] == std::pair<std::string, std::string>{"a", "{\"v\": 2}"});
  CHECK(all[1].first == "b");
}

TEST_CASE("records survive reopening") {
  TempDir dir;
  {
    SessionStore store(dir / "store.sqlite");
    store.put_session("s1", "one");
    store.put_datasource("sports", "{\"id\":\"sports\"}");
    store.put_template("", "generation", "{\"id\":\"g\"}");
    store.put_template("sports", "generation", "{\"id\":\"g2\"}");
    store.put_template("sports", "generation", "{\"id\":\"g3\"}");
  }
  SessionStore store(dir / "store.sqlite");
  CHECK(store.get_session("s1") == "one");
  REQUIRE(store.datasources().size() == 1);
  CHECK(store.datasources()[0].second == "{\"id\":\"sports\"}");
  const auto templates = store.templates();
  REQUIRE(templates.size() == 2);
  for (const auto& [key, value] : templates) {
    if (key.first == "sports") CHECK(value == "{\"id\":\"g3\"}");
    if (key.first.empty()) CHECK(value == "{\"id\":\"g\"}");
  }
}

TEST_CASE("a write is durable once put returns, even under SIGKILL") {
  TempDir dir;
  const auto path = dir / "store.sqlite";
  const pid_t child = fork();
  REQUIRE(child >= 0);
  if (child == 0) {
    SessionStore store(path);
    for (int i = 0; i < 20; ++i) store.put_session("s" + std::to_string(i), "record " + std::to_string(i));
    ::kill(::getpid(), SIGKILL);
    ::_exit(0);
  }
  int status = 0;
  ::waitpid(child, &status, 0);
  REQUIRE(WIFSIGNALED(status));
  SessionStore store(path);
  const auto all = store.sessions();
  REQUIRE(all.size() == 20);
  CHECK(all[19].second == "record 19");
}

TEST_CASE("concurrent writers") {
  TempDir dir;
  SessionStore store(dir / "store.sqlite");
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&store, t] {
      for (int i = 0; i < 25; ++i) {
        store.put_session(std::to_string(t) + "-" + std::to_string(i), std::to_string(i));
      }
    });
  }
  for (auto& thread : threads) thread.join();
  CHECK(store.sessions().size() == 100);
}

TEST_CASE("unusable paths") {
  TempDir dir;
  SessionStore nested(dir / "new" / "dir" / "store.sqlite");
  CHECK(std::filesystem::exists(dir / "new" / "dir" / "store.sqlite"));
  mirror::testing::write_file(dir / "plain", "x");
  CHECK_THROWS_AS(SessionStore(dir / "plain" / "store.sqlite"), StoreError);
  mirror::testing::write_file(dir / "junk.sqlite", "definitely not a database file, only text");
  CHECK_THROWS_AS(SessionStore(dir / "junk.sqlite"), StoreError);
}

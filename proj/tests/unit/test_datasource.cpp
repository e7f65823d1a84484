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

#include <algorithm>

#include "mirror/datasource.hpp"
#include "mirror/hash.hpp"
#include "test_support.hpp"

using namespace mirror::datasource;
using mirror::file_sha256_hex;
using mirror::sqlguard::ValidatedSql;
using mirror::testing::TempDir;

namespace {

DataSourceHandle open_embedded(const std::filesystem::path& path, std::size_t row_limit = 1000) {
  DataSourceConfig config;
  config.id = "sports";
  config.kind = SourceKind::kEmbeddedFile;
  config.location = path.string();
  config.row_limit = row_limit;
  return DataSource::open(config);
}

ResultTable run(const DataSource& source, const char* sql) {
  return source.execute(ValidatedSql::accept(sql));
}

ExecutionErrorKind failure_kind(const DataSource& source, const char* sql) {
  try {
    run(source, sql);
  } catch (const ExecutionError& e) {
    CHECK_FALSE(e.engine_message().empty());
    return e.kind();
  }
  FAIL("query did not fail: " << sql);
  return ExecutionErrorKind::kOther;
}

DataSourceErrorKind open_error_kind(const DataSourceConfig& config) {
  try {
    DataSource::open(config);
  } catch (const DataSourceError& e) {
    return e.kind();
  }
  FAIL("open did not throw");
  return DataSourceErrorKind::kParseFailure;
}

}  // namespace

TEST_CASE("introspection of the sports fixture") {
  TempDir dir;
  const auto source = open_embedded(mirror::testing::make_sports_db(dir));
  const auto meta = source->introspect();
  REQUIRE(meta.tables.size() == 3);
  CHECK(meta.tables[0].name == "games");
  CHECK(meta.tables[1].name == "players");
  CHECK(meta.tables[2].name == "teams");

  const TableMeta& players = meta.tables[1];
  REQUIRE(players.columns.size() == 7);
  CHECK(players.columns[0].name == "id");
  CHECK(players.columns[0].sql_type == "INTEGER");
  CHECK(players.columns[1].nullable == false);
  CHECK(players.columns[4].name == "age");
  CHECK(players.columns[4].nullable == true);
  CHECK(players.primary_key == std::vector<std::string>{"id"});
  REQUIRE(players.foreign_keys.size() == 1);
  CHECK(players.foreign_keys[0].column == "team_id");
  CHECK(players.foreign_keys[0].foreign_table == "teams");
  CHECK(players.foreign_keys[0].foreign_column == "id");

  CHECK(meta.fingerprint.size() == 64);
  CHECK(meta.fingerprint == compute_fingerprint(meta.tables));
  CHECK(source->introspect() == meta);
}

TEST_CASE("fingerprint changes with the schema") {
  TempDir dir;
  mirror::testing::create_database(dir / "a.sqlite", "CREATE TABLE t (a INTEGER);");
  mirror::testing::create_database(dir / "b.sqlite", "CREATE TABLE t (a TEXT);");
  mirror::testing::create_database(dir / "empty.sqlite", "");
  const auto a = open_embedded(dir / "a.sqlite")->introspect();
  const auto b = open_embedded(dir / "b.sqlite")->introspect();
  const auto empty = open_embedded(dir / "empty.sqlite")->introspect();
  CHECK(a.fingerprint != b.fingerprint);
  CHECK(empty.tables.empty());
  CHECK(empty.fingerprint.size() == 64);
}

TEST_CASE("execute returns typed cells") {
  TempDir dir;
  const auto source = open_embedded(mirror::testing::make_sports_db(dir));
  const auto table = run(*source,
                         "SELECT name, age, points, NULL AS blank, x'beef' AS raw "
                         "FROM players WHERE id IN (1, 9) ORDER BY id");
  REQUIRE(table.columns.size() == 5);
  CHECK(table.columns[0].type == TypeTag::kText);
  CHECK(table.columns[1].type == TypeTag::kInteger);
  CHECK(table.columns[2].type == TypeTag::kReal);
  CHECK(table.columns[3].type == TypeTag::kText);
  CHECK(table.columns[4].type == TypeTag::kBlob);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == Cell{std::string("Ana Ruiz")});
  CHECK(table.rows[0][1] == Cell{std::int64_t{27}});
  CHECK(table.rows[0][2] == Cell{612.5});
  CHECK(std::holds_alternative<std::monostate>(table.rows[1][1]));
  CHECK(table.rows[0][4] == Cell{std::string("beef")});
  CHECK_FALSE(table.truncated);
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) CHECK(cell_conforms(row[c], table.columns[c].type));
  }
}

TEST_CASE("mixed columns are unified") {
  TempDir dir;
  const auto source = open_embedded(mirror::testing::make_sports_db(dir));
  const auto mixed = run(*source, "SELECT 1 AS v UNION ALL SELECT 2.5 UNION ALL SELECT NULL");
  CHECK(mixed.columns[0].type == TypeTag::kReal);
  for (const auto& row : mixed.rows) CHECK(cell_conforms(row[0], TypeTag::kReal));
  const auto texty = run(*source, "SELECT 1 AS v UNION ALL SELECT 'x'");
  CHECK(texty.columns[0].type == TypeTag::kText);
  CHECK(texty.rows[0][0] == Cell{std::string("1")});
  const auto all_null = run(*source, "SELECT age FROM players WHERE age IS NULL");
  CHECK(all_null.columns[0].type == TypeTag::kInteger);
}

TEST_CASE("row limit truncates") {
  TempDir dir;
  const auto source = open_embedded(mirror::testing::make_sports_db(dir), 5);
  const auto table = run(*source, "SELECT id FROM players ORDER BY id");
  CHECK(table.rows.size() == 5);
  CHECK(table.truncated);
  const auto exact = run(*source, "SELECT id FROM players WHERE id <= 5");
  CHECK(exact.rows.size() == 5);
  CHECK_FALSE(exact.truncated);
}

TEST_CASE("engine errors are classified") {
  TempDir dir;
  const auto source = open_embedded(mirror::testing::make_sports_db(dir));
  CHECK(failure_kind(*source, "SELECT salary FROM players") == ExecutionErrorKind::kMissingRelation);
  CHECK(failure_kind(*source, "SELECT * FROM coaches") == ExecutionErrorKind::kMissingRelation);
  CHECK(failure_kind(*source, "SELECT json_extract('{bad', '$')") == ExecutionErrorKind::kTypeError);
  CHECK(failure_kind(*source, "SELECT id FROM players p JOIN teams t ON p.team_id = t.id") ==
        ExecutionErrorKind::kSyntax);
}

TEST_CASE("long queries time out") {
  TempDir dir;
  DataSourceConfig config;
  config.id = "slow";
  config.location = mirror::testing::make_sports_db(dir).string();
  config.timeout = std::chrono::milliseconds(100);
  const auto source = DataSource::open(config);
  CHECK(failure_kind(*source,
                     "WITH RECURSIVE n(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM n) "
                     "SELECT count(*) FROM n") == ExecutionErrorKind::kTimeout);
}

TEST_CASE("execution never changes the file") {
  TempDir dir;
  const auto path = mirror::testing::make_sports_db(dir);
  const auto before = file_sha256_hex(path);
  const auto source = open_embedded(path);
  run(*source, "SELECT * FROM players");
  run(*source, "WITH t AS (SELECT * FROM teams) SELECT count(*) FROM t");
  CHECK(file_sha256_hex(path) == before);
}

TEST_CASE("unreachable sources") {
  TempDir dir;
  DataSourceConfig missing;
  missing.id = "m";
  missing.location = (dir / "nope.sqlite").string();
  CHECK(open_error_kind(missing) == DataSourceErrorKind::kUnreachable);

  mirror::testing::write_file(dir / "junk.sqlite", "this is not a database, just some text....");
  DataSourceConfig junk = missing;
  junk.location = (dir / "junk.sqlite").string();
  CHECK(open_error_kind(junk) == DataSourceErrorKind::kUnreachable);

  DataSourceConfig remote = missing;
  remote.kind = SourceKind::kNetworkedRelational;
  remote.location = "postgres://db.example/sports";
  CHECK(open_error_kind(remote) == DataSourceErrorKind::kUnreachable);

  const auto sports = mirror::testing::make_sports_db(dir);
  remote.location = "sqlite://" + sports.string();
  CHECK(DataSource::open(remote)->introspect().tables.size() == 3);
}

TEST_CASE("csv ingestion") {
  TempDir dir;
  const auto csv_path = dir / "Team Stats.csv";
  mirror::testing::write_file(csv_path,
                              "team,wins,ratio,note,note\nHawks,10,0.5,,a\nComets,7,1.25,\"x,y\",b\n");
  const auto source = ingest_csv(csv_path, "Team Stats");
  const auto meta = source->introspect();
  REQUIRE(meta.tables.size() == 1);
  CHECK(meta.tables[0].name == "Team_Stats");
  std::vector<std::string> names;
  for (const auto& c : meta.tables[0].columns) names.push_back(c.name + ":" + c.sql_type);
  CHECK(names == std::vector<std::string>{"team:TEXT", "wins:INTEGER", "ratio:REAL", "note:TEXT",
                                          "note_2:TEXT"});

  const auto table = run(*source, "SELECT * FROM Team_Stats");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1] == Cell{std::int64_t{10}});
  CHECK(table.rows[1][2] == Cell{1.25});
  CHECK(std::holds_alternative<std::monostate>(table.rows[0][3]));
  CHECK(table.rows[1][3] == Cell{std::string("x,y")});

  const auto db = source->database_path();
  CHECK(std::filesystem::exists(db));
  CHECK(db.parent_path().filename().string().rfind("mirror-csv-", 0) == 0);
}

TEST_CASE("csv temp files are removed with the source") {
  TempDir dir;
  mirror::testing::write_file(dir / "x.csv", "a\n1\n");
  std::filesystem::path db;
  {
    const auto source = ingest_csv(dir / "x.csv", "x");
    db = source->database_path();
    CHECK(std::filesystem::exists(db));
  }
  CHECK_FALSE(std::filesystem::exists(db));
}

TEST_CASE("csv source kind opens through the file stem") {
  TempDir dir;
  mirror::testing::write_file(dir / "scores.csv", "v\n1\n2\n");
  DataSourceConfig config;
  config.id = "scores";
  config.kind = SourceKind::kCsv;
  config.location = (dir / "scores.csv").string();
  const auto source = DataSource::open(config);
  CHECK(run(*source, "SELECT sum(v) AS s FROM scores").rows[0][0] == Cell{std::int64_t{3}});

  mirror::testing::write_file(dir / "empty.csv", "");
  config.location = (dir / "empty.csv").string();
  CHECK(open_error_kind(config) == DataSourceErrorKind::kEmptyFile);
}

TEST_CASE("table names are sanitized") {
  CHECK(sanitize_table_name("Team Stats") == "Team_Stats");
  CHECK(sanitize_table_name("2024-results") == "_2024_results");
  CHECK(sanitize_table_name("") == "_");
  CHECK(sanitize_table_name("sqlite_stuff") == "_sqlite_stuff");
}

TEST_CASE("registry") {
  TempDir dir;
  const auto path = mirror::testing::make_sports_db(dir);
  Registry registry;
  DataSourceConfig config;
  config.id = "sports";
  config.location = path.string();
  registry.register_source(config);
  CHECK(registry.contains("sports"));
  CHECK(registry.find("sports") != nullptr);
  CHECK(registry.find("other") == nullptr);
  try {
    registry.register_source(config);
    FAIL("duplicate accepted");
  } catch (const DataSourceError& e) {
    CHECK(e.kind() == DataSourceErrorKind::kDuplicateId);
  }
  CHECK(registry.list().size() == 1);
}

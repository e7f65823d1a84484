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

#include "mirror/sql_guard.hpp"

namespace {

using mirror::sqlguard::ParseError;
using mirror::sqlguard::referenced_identifiers;
using mirror::sqlguard::validate;
using mirror::sqlguard::ValidatedSql;
using mirror::sqlguard::ValidationRejected;
using mirror::sqlguard::VerdictReason;

VerdictReason reason_of(const char* sql) { return validate(sql).reason; }

}  // namespace

TEST_CASE("plain selects are accepted") {
  for (const char* sql : {
           "SELECT 1",
           "select a from t;",
           "SELECT a, b AS bee FROM t WHERE a > 3 ORDER BY b DESC LIMIT 10 OFFSET 2",
           "SELECT t.name, COUNT(*) FROM players p JOIN teams t ON p.team_id = t.id GROUP BY t.name "
           "HAVING COUNT(*) > 1",
           "SELECT * FROM a LEFT OUTER JOIN b USING (id) CROSS JOIN c",
           "SELECT DISTINCT x FROM t UNION ALL SELECT y FROM u EXCEPT SELECT z FROM v",
           "SELECT CASE WHEN a IS NULL THEN 'none' ELSE CAST(a AS TEXT) END FROM t",
           "SELECT a FROM t WHERE b IN (SELECT b FROM u) AND c NOT BETWEEN 1 AND 5",
           "SELECT a FROM t WHERE name LIKE '%x%' ESCAPE '\\' OR name GLOB 'a*'",
           "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u WHERE u.id = t.id)",
           "SELECT rank() OVER (PARTITION BY team ORDER BY points DESC) FROM players",
           "SELECT SUM(x) FILTER (WHERE x > 0) FROM t",
           "SELECT replace(name, 'a', 'b'), left_col FROM t",
           "SELECT 'DROP TABLE t; DELETE FROM t' AS s",
           "SELECT \"select\", [from], `where` FROM t",
           "SELECT a FROM t -- trailing comment DROP TABLE t",
           "SELECT /* INSERT INTO t VALUES (1) */ a FROM t",
           "SELECT x'00ff', 1e10, 0x1F, .5 FROM t",
           "SELECT a FROM t ORDER BY a COLLATE NOCASE ASC NULLS LAST",
           "SELECT a IS NOT DISTINCT FROM b, a ISNULL, b NOTNULL FROM t",
       }) {
    CAPTURE(std::string(sql));
    const auto verdict = validate(sql);
    CHECK(verdict.accepted);
    CHECK(verdict.reason == VerdictReason::kOk);
    CHECK(verdict.detail.empty());
  }
}

TEST_CASE("common table expressions") {
  const auto verdict =
      validate("WITH top AS (SELECT team_id, SUM(points) AS s FROM players GROUP BY team_id) "
               "SELECT teams.name, top.s FROM top JOIN teams ON teams.id = top.team_id");
  CHECK(verdict.accepted);
  CHECK(verdict.referenced_tables == std::set<std::string>{"players", "teams"});

  CHECK(validate("WITH RECURSIVE n(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM n WHERE x < 5) "
                 "SELECT x FROM n")
            .accepted);
  CHECK(validate("WITH a AS MATERIALIZED (SELECT 1) SELECT * FROM a").accepted);
  CHECK(reason_of("WITH a AS (SELECT 1) DELETE FROM t") == VerdictReason::kNotASelect);
  CHECK(reason_of("WITH a AS (DELETE FROM t RETURNING *) SELECT * FROM a") ==
        VerdictReason::kForbiddenConstruct);
}

TEST_CASE("statements that are not selects") {
  for (const char* sql : {"DROP TABLE players", "DELETE FROM players", "UPDATE t SET a = 1",
                          "INSERT INTO t VALUES (1)", "CREATE TABLE x (a)", "PRAGMA table_info(t)",
                          "ATTACH DATABASE 'x.db' AS x", "VACUUM", "BEGIN", "EXPLAIN SELECT 1", "VALUES (1, 2)",
                          "REPLACE INTO t VALUES (1)", "ALTER TABLE t ADD COLUMN b"}) {
    CAPTURE(std::string(sql));
    const auto verdict = validate(sql);
    CHECK_FALSE(verdict.accepted);
    CHECK(verdict.reason == VerdictReason::kNotASelect);
    CHECK_FALSE(verdict.detail.empty());
  }
}

TEST_CASE("more than one statement") {
  CHECK(reason_of("SELECT 1; SELECT 2") == VerdictReason::kMultipleStatements);
  CHECK(reason_of("SELECT 1; DROP TABLE t") == VerdictReason::kMultipleStatements);
  CHECK(reason_of("SELECT 1;;") == VerdictReason::kMultipleStatements);
  CHECK(validate("SELECT 1;").accepted);
  CHECK(validate("SELECT 1;  -- done\n").accepted);
}

TEST_CASE("forbidden constructs inside a select") {
  CHECK(reason_of("SELECT * INTO backup FROM t") == VerdictReason::kForbiddenConstruct);
  CHECK(reason_of("SELECT a FROM t FOR UPDATE") == VerdictReason::kForbiddenConstruct);
  CHECK(reason_of("SELECT load_extension('x')") == VerdictReason::kForbiddenConstruct);
  // Table-valued functions are outside the accepted grammar.
  CHECK_FALSE(validate("SELECT * FROM pragma_table_info('t')").accepted);
  CHECK(validate("SELECT a FROM t WHERE a IN (VALUES (1), (2))").accepted);
  CHECK(reason_of("SELECT a FROM t WHERE a IN (DELETE FROM t)") ==
        VerdictReason::kForbiddenConstruct);
}

TEST_CASE("unparseable input") {
  for (const char* sql : {"", "   ", "SELECT", "SELECT FROM", "SELECT (1", "SELECT 'open",
                          "SELECT a FROM t WHERE", "SELECT ?", "SELECT :name"}) {
    CAPTURE(std::string(sql));
    const auto verdict = validate(sql);
    CHECK_FALSE(verdict.accepted);
    CHECK(verdict.reason == VerdictReason::kUnparseable);
  }
}

TEST_CASE("deep nesting is rejected rather than overflowing the stack") {
  std::string sql = "SELECT ";
  for (int i = 0; i < 5000; ++i) sql += "(";
  sql += "1";
  for (int i = 0; i < 5000; ++i) sql += ")";
  CHECK_FALSE(validate(sql).accepted);
}

TEST_CASE("referenced identifiers") {
  CHECK(referenced_identifiers("SELECT * FROM main.players p, teams") ==
        std::set<std::string>{"players", "teams"});
  CHECK(referenced_identifiers("SELECT 1 WHERE 2 IN games") == std::set<std::string>{"games"});
  CHECK(referenced_identifiers("WITH x AS (SELECT 1) SELECT * FROM x").empty());
  CHECK_THROWS_AS(referenced_identifiers("SELECT FROM"), ParseError);
}

TEST_CASE("validated sql can only come from accept") {
  const auto ok = ValidatedSql::accept("SELECT 1");
  CHECK(ok.text() == "SELECT 1");
  CHECK(ok.verdict().accepted);
  try {
    (void)ValidatedSql::accept("DROP TABLE t");
    FAIL("accepted a DROP");
  } catch (const ValidationRejected& e) {
    CHECK(e.verdict().reason == VerdictReason::kNotASelect);
  }
}

TEST_CASE("reason names round trip") {
  using mirror::sqlguard::reason_from_string;
  using mirror::sqlguard::to_string;
  for (auto reason : {VerdictReason::kOk, VerdictReason::kNotASelect,
                      VerdictReason::kMultipleStatements, VerdictReason::kUnparseable,
                      VerdictReason::kForbiddenConstruct}) {
    CHECK(reason_from_string(to_string(reason)) == reason);
  }
  CHECK(to_string(VerdictReason::kNotASelect) == "not-a-select");
  CHECK_FALSE(reason_from_string("nope").has_value());
}

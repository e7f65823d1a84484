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
#include <json.hpp>

#include "mirror/chartspec.hpp"
#include "mirror/serialization.hpp"
#include "test_support.hpp"

using namespace mirror::chart;
using mirror::datasource::Cell;
using mirror::datasource::ResultTable;
using mirror::datasource::TypeTag;
using json = nlohmann::json;

namespace {

struct Corpus {
  ResultTable table;
  std::vector<std::pair<std::string, std::string>> cases;  // raw, expected label
};

Corpus load_corpus() {
  const auto doc = json::parse(mirror::testing::read_file(mirror::testing::fixture_path("charts/corpus.json")));
  Corpus corpus;
  corpus.table = mirror::serialization::table_from_json(doc.at("table"));
  for (const auto& c : doc.at("cases")) {
    corpus.cases.emplace_back(c.at("raw").get<std::string>(), c.at("expect").get<std::string>());
  }
  return corpus;
}

std::string label_of(std::string_view raw, const ResultTable& table) {
  try {
    parse_and_validate(raw, table);
  } catch (const VegaInvalid& e) {
    return std::string(to_string(e.kind()));
  }
  return "ok";
}

ResultTable sample_table(int rows) {
  ResultTable table;
  table.columns = {{"name", TypeTag::kText}, {"score", TypeTag::kReal}, {"year", TypeTag::kInteger}};
  for (int i = 0; i < rows; ++i) {
    table.rows.push_back({Cell{"n" + std::to_string(i)}, i % 3 == 0 ? Cell{} : Cell{i * 0.1},
                          Cell{std::int64_t{2000 + i}}});
  }
  return table;
}

}  // namespace

TEST_CASE("name tables round trip") {
  for (auto m : {Mark::kBar, Mark::kLine, Mark::kArea, Mark::kPoint, Mark::kArc}) {
    CHECK(mark_from_string(to_string(m)) == m);
  }
  for (auto c : {Channel::kX, Channel::kY, Channel::kColor, Channel::kTheta}) {
    CHECK(channel_from_string(to_string(c)) == c);
  }
  for (auto t : {FieldType::kQuantitative, FieldType::kNominal, FieldType::kOrdinal,
                 FieldType::kTemporal}) {
    CHECK(field_type_from_string(to_string(t)) == t);
  }
  for (auto k : {VegaInvalidKind::kNotJson, VegaInvalidKind::kBadMark, VegaInvalidKind::kUnknownField,
                 VegaInvalidKind::kNoEncoding}) {
    CHECK(vega_invalid_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(mark_from_string("pie").has_value());
}

TEST_CASE("json object extraction") {
  CHECK(extract_json_object(R"({"a": 1})") == R"({"a": 1})");
  CHECK(extract_json_object("text\n```json\n{\"a\": 2}\n```") == "{\"a\": 2}");
  CHECK(extract_json_object(R"(see {"a": "}{", "b": {"c": 3}} end)") ==
        R"({"a": "}{", "b": {"c": 3}})");
  CHECK_FALSE(extract_json_object("[1, 2]").has_value());
  CHECK_FALSE(extract_json_object("{broken").has_value());
  CHECK_FALSE(extract_json_object("").has_value());
}

TEST_CASE("corpus classification") {
  const auto corpus = load_corpus();
  REQUIRE(corpus.cases.size() == 30);
  for (const auto& [raw, expected] : corpus.cases) {
    CAPTURE(raw);
    CHECK(label_of(raw, corpus.table) == expected);
  }
}

TEST_CASE("accepted charts reference only table columns and carry its rows") {
  const auto corpus = load_corpus();
  for (const auto& [raw, expected] : corpus.cases) {
    if (expected != "ok") continue;
    CAPTURE(raw);
    const auto spec = parse_and_validate(raw, corpus.table);
    std::vector<std::string> names;
    for (const auto& column : corpus.table.columns) names.push_back(column.name);
    CHECK(spec.data_columns == names);
    for (const auto& [channel, encoding] : spec.encodings) {
      CHECK(std::find(names.begin(), names.end(), encoding.field) != names.end());
    }
    CHECK(spec.inline_data == corpus.table.rows);
  }
}

TEST_CASE("parse and emit reach a fixed point") {
  const auto corpus = load_corpus();
  for (const auto& [raw, expected] : corpus.cases) {
    if (expected != "ok") continue;
    CAPTURE(raw);
    const auto spec = parse_and_validate(raw, corpus.table);
    const auto text = emit(spec);
    const auto again = parse_and_validate(text, corpus.table);
    CHECK(again == spec);
    CHECK(emit(again) == text);
  }
}

TEST_CASE("field types and titles") {
  const auto table = sample_table(2);
  const auto spec = parse_and_validate(
      R"({"mark": {"type": "line"}, "title": {"text": "Scores"},
          "encoding": {"x": {"field": "year", "type": "temporal"}, "y": {"field": "score"},
                       "color": {"field": "name"}, "size": {"field": "nope"}}})",
      table);
  CHECK(spec.mark == Mark::kLine);
  CHECK(spec.title == "Scores");
  REQUIRE(spec.encodings.size() == 3);
  CHECK(spec.encodings.at(Channel::kX) == Encoding{"year", FieldType::kTemporal});
  CHECK(spec.encodings.at(Channel::kY) == Encoding{"score", FieldType::kQuantitative});
  CHECK(spec.encodings.at(Channel::kColor) == Encoding{"name", FieldType::kNominal});
}

TEST_CASE("inline data respects the row cap") {
  const auto table = sample_table(12);
  const auto spec = parse_and_validate(R"({"mark": "bar", "encoding": {"x": {"field": "name"}}})",
                                       table, 5);
  REQUIRE(spec.inline_data.size() == 5);
  CHECK(spec.inline_data[4] == table.rows[4]);
  const auto full = parse_and_validate(R"({"mark": "bar", "encoding": {"x": {"field": "name"}}})",
                                       table);
  CHECK(full.inline_data.size() == 12);
}

TEST_CASE("emitted document shape") {
  const auto table = sample_table(2);
  const auto spec = parse_and_validate(
      R"({"mark": "point", "title": "T", "encoding": {"x": {"field": "year"}, "y": {"field": "score"}}})",
      table);
  const auto doc = json::parse(emit(spec));
  CHECK(doc.at("$schema") == kVegaLiteSchema);
  CHECK(doc.at("mark") == "point");
  CHECK(doc.at("title") == "T");
  CHECK(doc.at("encoding").at("x") == json{{"field", "year"}, {"type", "quantitative"}});
  const auto& values = doc.at("data").at("values");
  REQUIRE(values.size() == 2);
  CHECK(values[0] == json{{"name", "n0"}, {"score", nullptr}, {"year", 2000}});
  CHECK(values[1].at("score").get<double>() == 0.1);

  auto untitled = spec;
  untitled.title.reset();
  CHECK_FALSE(json::parse(emit(untitled)).contains("title"));
}

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

#include "mirror/chartspec.hpp"

#include <json.hpp>

#include <cctype>

namespace mirror::chart {
namespace {

using nlohmann::json;
using datasource::Cell;
using datasource::ResultTable;
using datasource::TypeTag;

std::optional<json> parse_object(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  return doc;
}

std::optional<std::string_view> first_fenced_block(std::string_view raw) {
  const std::size_t open = raw.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t content = raw.find('\n', open + 3);
  if (content == std::string_view::npos) return std::nullopt;
  ++content;
  const std::size_t close = raw.find("```", content);
  if (close == std::string_view::npos) return std::nullopt;
  std::string_view block = raw.substr(content, close - content);
  while (!block.empty() && std::isspace(static_cast<unsigned char>(block.back()))) {
    block.remove_suffix(1);
  }
  return block;
}

// First {...} region whose braces balance, skipping braces inside strings.
std::optional<std::string_view> first_balanced_object(std::string_view raw) {
  const std::size_t start = raw.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return raw.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

FieldType default_field_type(TypeTag tag) {
  return tag == TypeTag::kInteger || tag == TypeTag::kReal ? FieldType::kQuantitative
                                                           : FieldType::kNominal;
}

json cell_to_json(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return nullptr;
}

}  // namespace

std::string_view to_string(Mark mark) {
  switch (mark) {
    case Mark::kBar:
      return "bar";
    case Mark::kLine:
      return "line";
    case Mark::kArea:
      return "area";
    case Mark::kPoint:
      return "point";
    case Mark::kArc:
      return "arc";
  }
  return "bar";
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kX:
      return "x";
    case Channel::kY:
      return "y";
    case Channel::kColor:
      return "color";
    case Channel::kTheta:
      return "theta";
  }
  return "x";
}

std::string_view to_string(FieldType type) {
  switch (type) {
    case FieldType::kQuantitative:
      return "quantitative";
    case FieldType::kNominal:
      return "nominal";
    case FieldType::kOrdinal:
      return "ordinal";
    case FieldType::kTemporal:
      return "temporal";
  }
  return "nominal";
}

std::optional<Mark> mark_from_string(std::string_view text) {
  for (auto mark : {Mark::kBar, Mark::kLine, Mark::kArea, Mark::kPoint, Mark::kArc}) {
    if (to_string(mark) == text) return mark;
  }
  return std::nullopt;
}

std::optional<Channel> channel_from_string(std::string_view text) {
  for (auto channel : {Channel::kX, Channel::kY, Channel::kColor, Channel::kTheta}) {
    if (to_string(channel) == text) return channel;
  }
  return std::nullopt;
}

std::optional<FieldType> field_type_from_string(std::string_view text) {
  for (auto type : {FieldType::kQuantitative, FieldType::kNominal, FieldType::kOrdinal,
                    FieldType::kTemporal}) {
    if (to_string(type) == text) return type;
  }
  return std::nullopt;
}

std::string_view to_string(VegaInvalidKind kind) {
  switch (kind) {
    case VegaInvalidKind::kNotJson:
      return "not-json";
    case VegaInvalidKind::kBadMark:
      return "bad-mark";
    case VegaInvalidKind::kUnknownField:
      return "unknown-field";
    case VegaInvalidKind::kNoEncoding:
      return "no-encoding";
  }
  return "not-json";
}

std::optional<VegaInvalidKind> vega_invalid_kind_from_string(std::string_view text) {
  for (auto kind : {VegaInvalidKind::kNotJson, VegaInvalidKind::kBadMark,
                    VegaInvalidKind::kUnknownField, VegaInvalidKind::kNoEncoding}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<std::string> extract_json_object(std::string_view raw) {
  if (parse_object(raw)) return std::string(raw);
  if (const auto fenced = first_fenced_block(raw); fenced && parse_object(*fenced)) {
    return std::string(*fenced);
  }
  if (const auto region = first_balanced_object(raw); region && parse_object(*region)) {
    return std::string(*region);
  }
  return std::nullopt;
}

ChartSpec parse_and_validate(std::string_view raw, const ResultTable& table,
                             std::size_t chart_row_cap) {
  const auto object_text = extract_json_object(raw);
  if (!object_text) {
    throw VegaInvalid(VegaInvalidKind::kNotJson, "no JSON object found in model output");
  }
  const json doc = json::parse(*object_text);

  ChartSpec spec;
  const json* mark = doc.contains("mark") ? &doc.at("mark") : nullptr;
  if (mark != nullptr && mark->is_object() && mark->contains("type")) mark = &mark->at("type");
  if (mark == nullptr || !mark->is_string()) {
    throw VegaInvalid(VegaInvalidKind::kBadMark, "chart has no mark");
  }
  const auto parsed_mark = mark_from_string(mark->get<std::string>());
  if (!parsed_mark) {
    throw VegaInvalid(VegaInvalidKind::kBadMark,
                      "unsupported mark '" + mark->get<std::string>() + "'");
  }
  spec.mark = *parsed_mark;

  if (!doc.contains("encoding") || !doc.at("encoding").is_object()) {
    throw VegaInvalid(VegaInvalidKind::kNoEncoding, "chart has no encoding object");
  }
  const json& encoding = doc.at("encoding");
  if (!encoding.contains("x") && !encoding.contains("y") && !encoding.contains("theta")) {
    throw VegaInvalid(VegaInvalidKind::kNoEncoding, "encoding needs one of x, y, theta");
  }

  std::map<std::string, TypeTag, std::less<>> columns;
  for (const auto& column : table.columns) columns.emplace(column.name, column.type);

  for (const auto& [name, value] : encoding.items()) {
    const auto channel = channel_from_string(name);
    if (!channel) continue;
    if (!value.is_object() || !value.contains("field") || !value.at("field").is_string()) {
      throw VegaInvalid(VegaInvalidKind::kUnknownField,
                        "channel '" + name + "' does not name a field");
    }
    const std::string field = value.at("field").get<std::string>();
    const auto column = columns.find(field);
    if (column == columns.end()) {
      throw VegaInvalid(VegaInvalidKind::kUnknownField,
                        "channel '" + name + "' references unknown field '" + field + "'");
    }
    Encoding enc{field, default_field_type(column->second)};
    if (value.contains("type")) {
      const json& type = value.at("type");
      const auto parsed =
          type.is_string() ? field_type_from_string(type.get<std::string>()) : std::nullopt;
      if (!parsed) {
        throw VegaInvalid(VegaInvalidKind::kUnknownField,
                          "channel '" + name + "' has an unsupported field type");
      }
      enc.type = *parsed;
    }
    spec.encodings.emplace(*channel, std::move(enc));
  }

  if (doc.contains("title")) {
    const json& title = doc.at("title");
    if (title.is_string()) {
      spec.title = title.get<std::string>();
    } else if (title.is_object() && title.contains("text") && title.at("text").is_string()) {
      spec.title = title.at("text").get<std::string>();
    }
  }

  for (const auto& column : table.columns) spec.data_columns.push_back(column.name);
  const std::size_t rows = std::min(chart_row_cap, table.rows.size());
  spec.inline_data.assign(table.rows.begin(),
                          table.rows.begin() + static_cast<std::ptrdiff_t>(rows));
  return spec;
}

std::string emit(const ChartSpec& spec) {
  json encoding = json::object();
  for (const auto& [channel, enc] : spec.encodings) {
    encoding[std::string(to_string(channel))] = {{"field", enc.field},
                                                 {"type", std::string(to_string(enc.type))}};
  }
  json values = json::array();
  for (const auto& row : spec.inline_data) {
    json record = json::object();
    for (std::size_t c = 0; c < row.size() && c < spec.data_columns.size(); ++c) {
      record[spec.data_columns[c]] = cell_to_json(row[c]);
    }
    values.push_back(std::move(record));
  }
  json doc = {{"$schema", std::string(kVegaLiteSchema)},
              {"data", {{"values", std::move(values)}}},
              {"encoding", std::move(encoding)},
              {"mark", std::string(to_string(spec.mark))}};
  if (spec.title) doc["title"] = *spec.title;
  return doc.dump(2);
}

}  // namespace mirror::chart

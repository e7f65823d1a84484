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

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mirror/datasource.hpp"

namespace mirror::chart {

enum class Mark { kBar, kLine, kArea, kPoint, kArc };
enum class Channel { kX, kY, kColor, kTheta };
enum class FieldType { kQuantitative, kNominal, kOrdinal, kTemporal };

std::string_view to_string(Mark mark);
std::string_view to_string(Channel channel);
std::string_view to_string(FieldType type);
std::optional<Mark> mark_from_string(std::string_view text);
std::optional<Channel> channel_from_string(std::string_view text);
std::optional<FieldType> field_type_from_string(std::string_view text);

struct Encoding {
  std::string field;
  FieldType type = FieldType::kNominal;

  bool operator==(const Encoding&) const = default;
};

inline constexpr std::size_t kDefaultChartRowCap = 500;
inline constexpr std::string_view kVegaLiteSchema =
    "https://vega.github.io/schema/vega-lite/v5.json";

// A validated chart bound to a result table. inline_data holds the first
// chart_row_cap rows of the table, column for column.
struct ChartSpec {
  Mark mark = Mark::kBar;
  std::map<Channel, Encoding> encodings;
  std::optional<std::string> title;
  std::vector<std::string> data_columns;
  std::vector<std::vector<datasource::Cell>> inline_data;

  bool operator==(const ChartSpec&) const = default;
};

enum class VegaInvalidKind { kNotJson, kBadMark, kUnknownField, kNoEncoding };

std::string_view to_string(VegaInvalidKind kind);
std::optional<VegaInvalidKind> vega_invalid_kind_from_string(std::string_view text);

class VegaInvalid : public std::runtime_error {
 public:
  VegaInvalid(VegaInvalidKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  VegaInvalidKind kind() const { return kind_; }

 private:
  VegaInvalidKind kind_;
};

// Finds the JSON object in model output: the whole text, else the first
// ```-fenced block, else the first balanced {...} region. Returns nullopt when
// none of them parses as a JSON object.
std::optional<std::string> extract_json_object(std::string_view raw);

// Parses model output into a chart bound to `table`. Unknown top-level keys
// and channels outside x/y/color/theta are ignored; any data values the model
// supplied are replaced by the table's rows. Throws VegaInvalid.
ChartSpec parse_and_validate(std::string_view raw, const datasource::ResultTable& table,
                             std::size_t chart_row_cap = kDefaultChartRowCap);

// Vega-Lite JSON document with sorted keys, `$schema`, and data.values.
std::string emit(const ChartSpec& spec);

}  // namespace mirror::chart

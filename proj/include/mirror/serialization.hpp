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

#include <json.hpp>

#include "mirror/chartspec.hpp"
#include "mirror/datasource.hpp"
#include "mirror/llm_provider.hpp"
#include "mirror/pipeline.hpp"
#include "mirror/prompting.hpp"
#include "mirror/sql_guard.hpp"

// JSON documents for every record that crosses the HTTP or storage boundary.
// Objects use sorted keys, so dump() of the same value is byte-stable.
// The *_from_json functions throw std::invalid_argument on a malformed document.
namespace mirror::serialization {

using nlohmann::json;

json to_json(const datasource::Cell& cell);
datasource::Cell cell_from_json(const json& doc);

json to_json(const datasource::DataSourceConfig& config);
datasource::DataSourceConfig datasource_config_from_json(const json& doc);

json to_json(const datasource::SchemaMetadata& meta);
datasource::SchemaMetadata schema_from_json(const json& doc);

json to_json(const datasource::ResultTable& table);
datasource::ResultTable table_from_json(const json& doc);

json to_json(const sqlguard::ValidationVerdict& verdict);
sqlguard::ValidationVerdict verdict_from_json(const json& doc);

json to_json(const llm::GenerationParams& params);
llm::GenerationParams params_from_json(const json& doc);

json to_json(const prompting::PromptTemplate& tmpl);
prompting::PromptTemplate template_from_json(const json& doc);

json to_json(const prompting::Suggestion& suggestion);

json to_json(const pipeline::GenerationAttempt& attempt);
pipeline::GenerationAttempt attempt_from_json(const json& doc);

json to_json(const pipeline::ChartAttempt& attempt);
pipeline::ChartAttempt chart_attempt_from_json(const json& doc);

// The chart is stored as its emitted Vega-Lite document and rebuilt against
// the session's table on the way back in.
json to_json(const pipeline::QuerySession& session);
pipeline::QuerySession session_from_json(const json& doc);

}  // namespace mirror::serialization

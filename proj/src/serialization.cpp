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

#include "mirror/serialization.hpp"

#include <stdexcept>

namespace mirror::serialization {
namespace {

using datasource::Cell;

template <typename Enum, typename Parse>
Enum parse_enum(const json& value, Parse parse, const char* what) {
  const auto parsed = parse(value.get<std::string>());
  if (!parsed) {
    throw std::invalid_argument(std::string("unknown ") + what + " '" +
                                value.get<std::string>() + "'");
  }
  return *parsed;
}

std::optional<llm::ProviderErrorKind> provider_error_kind_from_string(std::string_view text) {
  using K = llm::ProviderErrorKind;
  for (auto kind : {K::kTimeout, K::kAuth, K::kRateLimit, K::kMalformedResponse, K::kUnavailable}) {
    if (llm::to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

// Runs `fn`, turning nlohmann type and key errors into invalid_argument.
template <typename Fn>
auto guarded(const char* what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed ") + what + ": " + e.what());
  }
}

template <typename T>
json optional_to_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

std::optional<std::string> optional_string(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<std::string>();
}

json provider_failure_to_json(const std::optional<pipeline::ProviderFailure>& failure) {
  if (!failure) return nullptr;
  return {{"kind", std::string(llm::to_string(failure->kind))}, {"message", failure->message}};
}

std::optional<pipeline::ProviderFailure> provider_failure_from_json(const json& doc,
                                                                    const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  const json& value = doc.at(key);
  return pipeline::ProviderFailure{
      parse_enum<llm::ProviderErrorKind>(value.at("kind"), provider_error_kind_from_string,
                                         "provider error kind"),
      value.at("message").get<std::string>()};
}

}  // namespace

json to_json(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return nullptr;
}

Cell cell_from_json(const json& doc) {
  if (doc.is_null()) return std::monostate{};
  if (doc.is_number_unsigned()) {
    const auto value = doc.get<std::uint64_t>();
    if (value > static_cast<std::uint64_t>(INT64_MAX)) {
      throw std::invalid_argument("integer cell out of range");
    }
    return static_cast<std::int64_t>(value);
  }
  if (doc.is_number_integer()) return doc.get<std::int64_t>();
  if (doc.is_number_float()) return doc.get<double>();
  if (doc.is_string()) return doc.get<std::string>();
  throw std::invalid_argument("cell must be null, number or string");
}

json to_json(const datasource::DataSourceConfig& config) {
  return {{"id", config.id},
          {"kind", std::string(datasource::to_string(config.kind))},
          {"location", config.location},
          {"read_only", config.read_only},
          {"row_limit", config.row_limit},
          {"timeout_ms", config.timeout.count()}};
}

datasource::DataSourceConfig datasource_config_from_json(const json& doc) {
  return guarded("data source config", [&] {
    datasource::DataSourceConfig config;
    config.id = doc.at("id").get<std::string>();
    if (doc.contains("kind")) {
      config.kind = parse_enum<datasource::SourceKind>(
          doc.at("kind"), datasource::source_kind_from_string, "data source kind");
    }
    config.location = doc.at("location").get<std::string>();
    config.read_only = doc.value("read_only", true);
    config.row_limit = doc.value("row_limit", datasource::kDefaultRowLimit);
    config.timeout = std::chrono::milliseconds(
        doc.value("timeout_ms", static_cast<std::int64_t>(datasource::kDefaultQueryTimeout.count())));
    return config;
  });
}

json to_json(const datasource::SchemaMetadata& meta) {
  json tables = json::array();
  for (const auto& table : meta.tables) {
    json columns = json::array();
    for (const auto& column : table.columns) {
      columns.push_back(
          {{"name", column.name}, {"type", column.sql_type}, {"nullable", column.nullable}});
    }
    json foreign_keys = json::array();
    for (const auto& fk : table.foreign_keys) {
      foreign_keys.push_back({{"column", fk.column},
                              {"foreign_table", fk.foreign_table},
                              {"foreign_column", fk.foreign_column}});
    }
    tables.push_back({{"name", table.name},
                      {"columns", std::move(columns)},
                      {"primary_key", table.primary_key},
                      {"foreign_keys", std::move(foreign_keys)}});
  }
  return {{"tables", std::move(tables)}, {"fingerprint", meta.fingerprint}};
}

datasource::SchemaMetadata schema_from_json(const json& doc) {
  return guarded("schema", [&] {
    datasource::SchemaMetadata meta;
    for (const auto& t : doc.at("tables")) {
      datasource::TableMeta table;
      table.name = t.at("name").get<std::string>();
      for (const auto& c : t.at("columns")) {
        table.columns.push_back({c.at("name").get<std::string>(), c.at("type").get<std::string>(),
                                 c.at("nullable").get<bool>()});
      }
      table.primary_key = t.at("primary_key").get<std::vector<std::string>>();
      for (const auto& fk : t.at("foreign_keys")) {
        table.foreign_keys.push_back({fk.at("column").get<std::string>(),
                                      fk.at("foreign_table").get<std::string>(),
                                      fk.at("foreign_column").get<std::string>()});
      }
      meta.tables.push_back(std::move(table));
    }
    meta.fingerprint = doc.at("fingerprint").get<std::string>();
    return meta;
  });
}

json to_json(const datasource::ResultTable& table) {
  json columns = json::array();
  for (const auto& column : table.columns) {
    columns.push_back({{"name", column.name}, {"type", std::string(datasource::to_string(column.type))}});
  }
  json rows = json::array();
  for (const auto& row : table.rows) {
    json cells = json::array();
    for (const auto& cell : row) cells.push_back(to_json(cell));
    rows.push_back(std::move(cells));
  }
  return {{"columns", std::move(columns)}, {"rows", std::move(rows)}, {"truncated", table.truncated}};
}

datasource::ResultTable table_from_json(const json& doc) {
  return guarded("result table", [&] {
    datasource::ResultTable table;
    for (const auto& c : doc.at("columns")) {
      table.columns.push_back(
          {c.at("name").get<std::string>(),
           parse_enum<datasource::TypeTag>(c.at("type"), datasource::type_tag_from_string,
                                           "column type")});
    }
    for (const auto& r : doc.at("rows")) {
      if (!r.is_array() || r.size() != table.columns.size()) {
        throw std::invalid_argument("malformed result table: row width mismatch");
      }
      std::vector<Cell> row;
      row.reserve(r.size());
      for (const auto& cell : r) row.push_back(cell_from_json(cell));
      table.rows.push_back(std::move(row));
    }
    table.truncated = doc.at("truncated").get<bool>();
    return table;
  });
}

json to_json(const sqlguard::ValidationVerdict& verdict) {
  return {{"accepted", verdict.accepted},
          {"reason", std::string(sqlguard::to_string(verdict.reason))},
          {"referenced_tables", verdict.referenced_tables},
          {"detail", verdict.detail}};
}

sqlguard::ValidationVerdict verdict_from_json(const json& doc) {
  return guarded("verdict", [&] {
    sqlguard::ValidationVerdict verdict;
    verdict.accepted = doc.at("accepted").get<bool>();
    verdict.reason = parse_enum<sqlguard::VerdictReason>(doc.at("reason"),
                                                         sqlguard::reason_from_string, "reason");
    verdict.referenced_tables = doc.at("referenced_tables").get<std::set<std::string>>();
    verdict.detail = doc.at("detail").get<std::string>();
    return verdict;
  });
}

json to_json(const llm::GenerationParams& params) {
  return {{"temperature", params.temperature},
          {"top_p", params.top_p},
          {"max_output_tokens", params.max_output_tokens},
          {"stop_sequences", params.stop_sequences},
          {"seed_hint", optional_to_json(params.seed_hint)}};
}

llm::GenerationParams params_from_json(const json& doc) {
  return guarded("generation params", [&] {
    llm::GenerationParams params;
    params.temperature = doc.at("temperature").get<double>();
    params.top_p = doc.at("top_p").get<double>();
    params.max_output_tokens = doc.at("max_output_tokens").get<std::size_t>();
    params.stop_sequences = doc.at("stop_sequences").get<std::vector<std::string>>();
    if (doc.contains("seed_hint") && !doc.at("seed_hint").is_null()) {
      params.seed_hint = doc.at("seed_hint").get<std::int64_t>();
    }
    return params;
  });
}

json to_json(const prompting::PromptTemplate& tmpl) {
  return {{"id", tmpl.id},
          {"kind", std::string(prompting::to_string(tmpl.kind))},
          {"body", tmpl.body},
          {"instructions", tmpl.instructions}};
}

prompting::PromptTemplate template_from_json(const json& doc) {
  return guarded("template", [&] {
    prompting::PromptTemplate tmpl;
    tmpl.id = doc.at("id").get<std::string>();
    tmpl.kind = parse_enum<prompting::TemplateKind>(
        doc.at("kind"), prompting::template_kind_from_string, "template kind");
    tmpl.body = doc.at("body").get<std::string>();
    tmpl.instructions = doc.value("instructions", std::string());
    return tmpl;
  });
}

json to_json(const prompting::Suggestion& suggestion) {
  return {{"completion", suggestion.completion},
          {"kind", std::string(prompting::to_string(suggestion.kind))},
          {"source_table", optional_to_json(suggestion.source_table)}};
}

json to_json(const pipeline::GenerationAttempt& attempt) {
  json execution_error = nullptr;
  if (attempt.execution_error) {
    execution_error = {{"kind", std::string(datasource::to_string(attempt.execution_error->kind))},
                       {"message", attempt.execution_error->message}};
  }
  return {{"index", attempt.index},
          {"prompt_fingerprint", attempt.prompt_fingerprint},
          {"raw_output", attempt.raw_output},
          {"extracted_sql", attempt.extracted_sql},
          {"verdict", to_json(attempt.verdict)},
          {"execution_error", std::move(execution_error)},
          {"extraction_error", optional_to_json(attempt.extraction_error)},
          {"provider_error", provider_failure_to_json(attempt.provider_error)},
          {"params_used", to_json(attempt.params_used)},
          {"prompt_text", optional_to_json(attempt.prompt_text)}};
}

pipeline::GenerationAttempt attempt_from_json(const json& doc) {
  return guarded("attempt", [&] {
    pipeline::GenerationAttempt attempt;
    attempt.index = doc.at("index").get<std::size_t>();
    attempt.prompt_fingerprint = doc.at("prompt_fingerprint").get<std::string>();
    attempt.raw_output = doc.at("raw_output").get<std::string>();
    attempt.extracted_sql = doc.at("extracted_sql").get<std::string>();
    attempt.verdict = verdict_from_json(doc.at("verdict"));
    if (doc.contains("execution_error") && !doc.at("execution_error").is_null()) {
      const json& e = doc.at("execution_error");
      attempt.execution_error = pipeline::ExecutionFailure{
          parse_enum<datasource::ExecutionErrorKind>(
              e.at("kind"), datasource::execution_error_kind_from_string, "execution error kind"),
          e.at("message").get<std::string>()};
    }
    attempt.extraction_error = optional_string(doc, "extraction_error");
    attempt.provider_error = provider_failure_from_json(doc, "provider_error");
    attempt.params_used = params_from_json(doc.at("params_used"));
    attempt.prompt_text = optional_string(doc, "prompt_text");
    return attempt;
  });
}

json to_json(const pipeline::ChartAttempt& attempt) {
  return {{"index", attempt.index},
          {"raw_output", attempt.raw_output},
          {"error", attempt.error ? json(std::string(chart::to_string(*attempt.error))) : json(nullptr)},
          {"provider_error", provider_failure_to_json(attempt.provider_error)},
          {"message", attempt.message},
          {"params_used", to_json(attempt.params_used)}};
}

pipeline::ChartAttempt chart_attempt_from_json(const json& doc) {
  return guarded("chart attempt", [&] {
    pipeline::ChartAttempt attempt;
    attempt.index = doc.at("index").get<std::size_t>();
    attempt.raw_output = doc.at("raw_output").get<std::string>();
    if (doc.contains("error") && !doc.at("error").is_null()) {
      attempt.error = parse_enum<chart::VegaInvalidKind>(
          doc.at("error"), chart::vega_invalid_kind_from_string, "chart error kind");
    }
    attempt.provider_error = provider_failure_from_json(doc, "provider_error");
    attempt.message = doc.at("message").get<std::string>();
    attempt.params_used = params_from_json(doc.at("params_used"));
    return attempt;
  });
}

json to_json(const pipeline::QuerySession& session) {
  json attempts = json::array();
  for (const auto& attempt : session.attempts) attempts.push_back(to_json(attempt));
  json edit_attempts = json::array();
  for (const auto& attempt : session.edit_attempts) edit_attempts.push_back(to_json(attempt));
  json chart_attempts = json::array();
  for (const auto& attempt : session.chart_attempts) chart_attempts.push_back(to_json(attempt));
  return {{"id", session.id},
          {"datasource_id", session.datasource_id},
          {"question", session.question},
          {"attempts", std::move(attempts)},
          {"edit_attempts", std::move(edit_attempts)},
          {"final_sql", optional_to_json(session.final_sql)},
          {"table", session.table ? to_json(*session.table) : json(nullptr)},
          {"summary", optional_to_json(session.summary)},
          {"summary_error", provider_failure_to_json(session.summary_error)},
          {"chart", session.chart ? json::parse(chart::emit(*session.chart)) : json(nullptr)},
          {"chart_attempts", std::move(chart_attempts)},
          {"status", std::string(pipeline::to_string(session.status))},
          {"notice", optional_to_json(session.notice)},
          {"error", optional_to_json(session.error)},
          {"created_at", session.created_at},
          {"updated_at", session.updated_at}};
}

pipeline::QuerySession session_from_json(const json& doc) {
  return guarded("session", [&] {
    pipeline::QuerySession session;
    session.id = doc.at("id").get<std::string>();
    session.datasource_id = doc.at("datasource_id").get<std::string>();
    session.question = doc.at("question").get<std::string>();
    for (const auto& a : doc.at("attempts")) session.attempts.push_back(attempt_from_json(a));
    for (const auto& a : doc.at("edit_attempts")) {
      session.edit_attempts.push_back(attempt_from_json(a));
    }
    session.final_sql = optional_string(doc, "final_sql");
    if (!doc.at("table").is_null()) session.table = table_from_json(doc.at("table"));
    session.summary = optional_string(doc, "summary");
    session.summary_error = provider_failure_from_json(doc, "summary_error");
    if (!doc.at("chart").is_null()) {
      if (!session.table) throw std::invalid_argument("malformed session: chart without table");
      try {
        // The stored document carries exactly the rows that were inlined.
        const json& chart_doc = doc.at("chart");
        const std::size_t inlined = chart_doc.at("data").at("values").size();
        session.chart = chart::parse_and_validate(chart_doc.dump(), *session.table, inlined);
      } catch (const chart::VegaInvalid& e) {
        throw std::invalid_argument(std::string("malformed session chart: ") + e.what());
      }
    }
    for (const auto& a : doc.at("chart_attempts")) {
      session.chart_attempts.push_back(chart_attempt_from_json(a));
    }
    session.status = parse_enum<pipeline::SessionStatus>(
        doc.at("status"), pipeline::session_status_from_string, "session status");
    session.notice = optional_string(doc, "notice");
    session.error = optional_string(doc, "error");
    session.created_at = doc.at("created_at").get<std::string>();
    session.updated_at = doc.at("updated_at").get<std::string>();
    return session;
  });
}

}  // namespace mirror::serialization

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

#include "mirror/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>
#include <utility>
#include <variant>

#include "mirror/hash.hpp"

namespace mirror::pipeline {
namespace {

using datasource::DataSource;
using datasource::ResultTable;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

bool keyword_at(std::string_view text, std::size_t pos, std::string_view keyword) {
  if (pos + keyword.size() > text.size()) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[pos + i])) != keyword[i]) return false;
  }
  if (pos > 0 && is_word_char(text[pos - 1])) return false;
  const std::size_t end = pos + keyword.size();
  return end == text.size() || !is_word_char(text[end]);
}

bool statement_keyword_at(std::string_view text, std::size_t pos) {
  return keyword_at(text, pos, "SELECT") || keyword_at(text, pos, "WITH");
}

// Content of the first ``` block, minus its info string. An unterminated
// fence runs to the end of the text.
std::string_view fenced_body(std::string_view raw) {
  const std::size_t open = raw.find("```");
  if (open == std::string_view::npos) return raw;
  std::size_t start = raw.find('\n', open + 3);
  if (start == std::string_view::npos) return raw.substr(open + 3);
  ++start;
  const std::size_t close = raw.find("```", start);
  return raw.substr(start, close == std::string_view::npos ? std::string_view::npos
                                                           : close - start);
}

std::size_t statement_start(std::string_view text) {
  // Prefer a line that opens with the keyword over one buried in prose.
  std::size_t line = 0;
  while (line < text.size()) {
    std::size_t pos = line;
    while (pos < text.size() && text[pos] != '\n' && is_space(text[pos])) ++pos;
    if (statement_keyword_at(text, pos)) return pos;
    const std::size_t next = text.find('\n', line);
    if (next == std::string_view::npos) break;
    line = next + 1;
  }
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    if (statement_keyword_at(text, pos)) return pos;
  }
  return std::string_view::npos;
}

// Offset just past the last semicolon outside quotes, comments and parens.
std::optional<std::size_t> end_after_last_semicolon(std::string_view sql) {
  std::optional<std::size_t> end;
  int depth = 0;
  std::size_t i = 0;
  while (i < sql.size()) {
    const char c = sql[i];
    if (c == '\'' || c == '"' || c == '`') {
      const std::size_t close = sql.find(c, i + 1);
      if (close == std::string_view::npos) break;
      i = close + 1;
    } else if (c == '[') {
      const std::size_t close = sql.find(']', i + 1);
      if (close == std::string_view::npos) break;
      i = close + 1;
    } else if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      const std::size_t nl = sql.find('\n', i);
      if (nl == std::string_view::npos) break;
      i = nl + 1;
    } else if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
      const std::size_t close = sql.find("*/", i + 2);
      if (close == std::string_view::npos) break;
      i = close + 2;
    } else {
      if (c == '(') ++depth;
      if (c == ')' && depth > 0) --depth;
      if (c == ';' && depth == 0) end = i + 1;
      ++i;
    }
  }
  return end;
}

// Extract, validate and execute the attempt's raw output in place. Returns
// the table on success.
std::optional<ResultTable> evaluate(GenerationAttempt& attempt, const DataSource& source) {
  try {
    attempt.extracted_sql = extract_sql(attempt.raw_output);
  } catch (const ExtractionError& e) {
    attempt.extraction_error = e.what();
    attempt.verdict = sqlguard::validate(attempt.extracted_sql);
    return std::nullopt;
  }
  attempt.verdict = sqlguard::validate(attempt.extracted_sql);
  if (!attempt.verdict.accepted) return std::nullopt;
  try {
    return source.execute(sqlguard::ValidatedSql::accept(attempt.extracted_sql));
  } catch (const datasource::ExecutionError& e) {
    attempt.execution_error = ExecutionFailure{e.kind(), e.engine_message()};
    return std::nullopt;
  }
}

ProviderFailure failure_of(const llm::ProviderError& e) { return {e.kind(), e.what()}; }

void require_source(const QuerySession& session, const DataSource& source) {
  if (session.datasource_id != source.id()) {
    throw SessionConflict("session " + session.id + " belongs to data source '" +
                          session.datasource_id + "', not '" + source.id() + "'");
  }
}

// Installs a new result. Summary and chart describe the old table, so they go
// too; stage two rebuilds them.
void replace_result(QuerySession& session, std::string sql, ResultTable table) {
  session.final_sql = std::move(sql);
  session.table = std::move(table);
  session.summary.reset();
  session.summary_error.reset();
  session.chart.reset();
  session.chart_attempts.clear();
  session.notice.reset();
  session.error.reset();
  session.status = SessionStatus::kSucceeded;
}

}  // namespace

double temperature_for_attempt(const PipelineOptions& options, std::size_t index) {
  const double steps = index == 0 ? 0.0 : static_cast<double>(index - 1);
  return std::min(options.base_temperature + options.temperature_step * steps,
                  options.max_temperature);
}

llm::GenerationParams params_for_attempt(const PipelineOptions& options, std::size_t index) {
  llm::GenerationParams params = options.base_params;
  params.temperature = temperature_for_attempt(options, index);
  return params;
}

std::string extract_sql(std::string_view raw_output) {
  const std::string_view body = fenced_body(raw_output);
  const std::size_t start = statement_start(body);
  if (start == std::string_view::npos) {
    throw ExtractionError("model output contains no SELECT or WITH statement");
  }
  std::string_view sql = body.substr(start);
  if (const auto end = end_after_last_semicolon(sql)) sql = sql.substr(0, *end);
  return std::string(trim(sql));
}

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::kPending:
      return "pending";
    case SessionStatus::kSqlFailed:
      return "sql-failed";
    case SessionStatus::kSucceeded:
      return "succeeded";
    case SessionStatus::kSummarizing:
      return "summarizing";
    case SessionStatus::kComplete:
      return "complete";
  }
  return "pending";
}

std::optional<SessionStatus> session_status_from_string(std::string_view text) {
  for (auto status : {SessionStatus::kPending, SessionStatus::kSqlFailed,
                      SessionStatus::kSucceeded, SessionStatus::kSummarizing,
                      SessionStatus::kComplete}) {
    if (to_string(status) == text) return status;
  }
  return std::nullopt;
}

TemplateSet TemplateSet::defaults() {
  return {prompting::default_template(prompting::TemplateKind::kGeneration),
          prompting::default_template(prompting::TemplateKind::kSummarization),
          prompting::default_template(prompting::TemplateKind::kVisualization)};
}

const prompting::PromptTemplate& TemplateSet::get(prompting::TemplateKind kind) const {
  switch (kind) {
    case prompting::TemplateKind::kGeneration:
      return generation;
    case prompting::TemplateKind::kSummarization:
      return summarization;
    case prompting::TemplateKind::kVisualization:
      return visualization;
  }
  return generation;
}

prompting::PromptTemplate& TemplateSet::get(prompting::TemplateKind kind) {
  return const_cast<prompting::PromptTemplate&>(std::as_const(*this).get(kind));
}

std::string new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() %
      1000;
  const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char date[32];
  std::strftime(date, sizeof(date), "%Y-%m-%dT%H:%M:%S", &utc);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s.%03dZ", date, static_cast<int>(millis));
  return buf;
}

Orchestrator::Orchestrator(llm::Provider& provider, PipelineOptions options,
                           SessionObserver observer)
    : provider_(provider), options_(std::move(options)), observer_(std::move(observer)) {
  if (options_.max_retries == 0) throw std::invalid_argument("max_retries must be positive");
  llm::check_params(options_.base_params);
}

void Orchestrator::publish(QuerySession& session) {
  session.updated_at = utc_timestamp_now();
  if (observer_) observer_(session);
}

QuerySession Orchestrator::run_query(const DataSource& source, const TemplateSet& templates,
                                     std::string question, std::string session_id) {
  if (trim(question).empty()) throw std::invalid_argument("question is empty");

  QuerySession session;
  session.id = session_id.empty() ? new_session_id() : std::move(session_id);
  session.datasource_id = source.id();
  session.question = std::move(question);
  session.created_at = utc_timestamp_now();
  publish(session);

  const auto prompt = prompting::render_generation_prompt(templates.generation,
                                                          source.introspect(), session.question);
  const std::string fingerprint = sha256_hex(prompt.text);

  for (std::size_t index = 1; index <= options_.max_retries; ++index) {
    GenerationAttempt attempt;
    attempt.index = index;
    attempt.prompt_fingerprint = fingerprint;
    attempt.params_used = params_for_attempt(options_, index);
    if (options_.debug) attempt.prompt_text = prompt.text;

    try {
      attempt.raw_output = provider_.complete(prompt, attempt.params_used).text;
    } catch (const llm::ProviderError& e) {
      attempt.provider_error = failure_of(e);
      attempt.verdict.detail = "no model output";
      session.attempts.push_back(std::move(attempt));
      if (!e.retryable()) {
        session.status = SessionStatus::kSqlFailed;
        session.error = std::string("provider error: ") + e.what();
        publish(session);
        throw;
      }
      publish(session);
      continue;
    }

    auto table = evaluate(attempt, source);
    session.attempts.push_back(attempt);
    if (table) {
      replace_result(session, attempt.extracted_sql, std::move(*table));
      publish(session);
      run_stage_two(session, templates);
      return session;
    }
    publish(session);
  }

  session.status = SessionStatus::kSqlFailed;
  publish(session);
  return session;
}

void Orchestrator::run_stage_two(QuerySession& session, const TemplateSet& templates) {
  if (!session.table) throw SessionConflict("stage two requires a result table");

  session.status = SessionStatus::kSummarizing;
  session.summary.reset();
  session.summary_error.reset();
  session.chart.reset();
  session.chart_attempts.clear();
  publish(session);

  const ResultTable& table = *session.table;
  if (table.rows.empty()) {
    session.summary = kNoRowsSummary;
    session.status = SessionStatus::kComplete;
    publish(session);
    return;
  }

  llm::GenerationParams summary_params = options_.base_params;
  summary_params.temperature = options_.summary_temperature;
  const auto summary_prompt = prompting::render_summarization_prompt(
      templates.summarization, session.question, table, options_.prompt_row_cap);
  try {
    session.summary = std::string(trim(provider_.complete(summary_prompt, summary_params).text));
  } catch (const llm::ProviderError& e) {
    session.summary_error = failure_of(e);
  }
  publish(session);

  auto chart_prompt = prompting::render_visualization_prompt(
      templates.visualization, session.question, table, options_.prompt_row_cap);
  if (const auto* skipped = std::get_if<prompting::VisualizationSkipped>(&chart_prompt)) {
    session.notice = "chart skipped: " + skipped->reason;
  } else {
    const auto& prompt = std::get<prompting::RenderedPrompt>(chart_prompt);
    for (std::size_t index = 1; index <= options_.max_chart_retries; ++index) {
      ChartAttempt attempt;
      attempt.index = index;
      attempt.params_used = params_for_attempt(options_, index);
      bool stop = false;
      try {
        attempt.raw_output = provider_.complete(prompt, attempt.params_used).text;
        session.chart = chart::parse_and_validate(attempt.raw_output, table,
                                                  options_.chart_row_cap);
        stop = true;
      } catch (const llm::ProviderError& e) {
        attempt.provider_error = failure_of(e);
        attempt.message = e.what();
        stop = !e.retryable();
      } catch (const chart::VegaInvalid& e) {
        attempt.error = e.kind();
        attempt.message = e.what();
      }
      session.chart_attempts.push_back(std::move(attempt));
      if (stop) break;
      publish(session);
    }
  }

  session.status = SessionStatus::kComplete;
  publish(session);
}

void Orchestrator::rerun_sql(QuerySession& session, const DataSource& source,
                             std::string_view sql, const TemplateSet& templates) {
  require_source(session, source);
  auto validated = sqlguard::ValidatedSql::accept(std::string(trim(sql)));
  auto table = source.execute(validated);

  replace_result(session, validated.text(), std::move(table));
  publish(session);
  run_stage_two(session, templates);
}

void Orchestrator::edit_with_instruction(QuerySession& session, const DataSource& source,
                                         std::string_view instruction,
                                         const TemplateSet& templates) {
  if (trim(instruction).empty()) throw std::invalid_argument("instruction is empty");
  if (!session.final_sql) throw SessionConflict("session has no SQL to edit");
  require_source(session, source);

  const std::string base_sql = *session.final_sql;
  const std::string fingerprint = sha256_hex(base_sql + "\n" + std::string(instruction));
  session.edit_attempts.clear();

  for (std::size_t index = 1; index <= options_.max_retries; ++index) {
    GenerationAttempt attempt;
    attempt.index = index;
    attempt.prompt_fingerprint = fingerprint;
    attempt.params_used = params_for_attempt(options_, index);
    if (options_.debug) attempt.prompt_text = base_sql + "\n" + std::string(instruction);

    try {
      attempt.raw_output = provider_.edit(base_sql, instruction, attempt.params_used).text;
    } catch (const llm::ProviderError& e) {
      attempt.provider_error = failure_of(e);
      attempt.verdict.detail = "no model output";
      session.edit_attempts.push_back(std::move(attempt));
      if (!e.retryable()) {
        session.notice = std::string("instructed edit failed: ") + e.what();
        publish(session);
        throw;
      }
      publish(session);
      continue;
    }

    auto table = evaluate(attempt, source);
    session.edit_attempts.push_back(attempt);
    if (table) {
      replace_result(session, attempt.extracted_sql, std::move(*table));
      publish(session);
      run_stage_two(session, templates);
      return;
    }
    publish(session);
  }

  session.notice = "instructed edit failed after " + std::to_string(options_.max_retries) +
                   " attempts; previous SQL and results kept";
  publish(session);
}

}  // namespace mirror::pipeline

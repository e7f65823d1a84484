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

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mirror/chartspec.hpp"
#include "mirror/datasource.hpp"
#include "mirror/llm_provider.hpp"
#include "mirror/prompting.hpp"
#include "mirror/sql_guard.hpp"

namespace mirror::pipeline {

inline constexpr char kNoRowsSummary[] = "The query returned no rows.";

struct PipelineOptions {
  std::size_t max_retries = 3;
  std::size_t max_chart_retries = 3;
  // Attempt i (1-based) samples at min(base + step * (i - 1), max).
  double base_temperature = 0.2;
  double temperature_step = 0.3;
  double max_temperature = 1.0;
  double summary_temperature = 0.0;
  std::size_t prompt_row_cap = prompting::kDefaultPromptRowCap;
  std::size_t chart_row_cap = chart::kDefaultChartRowCap;
  // Everything but temperature is taken from here for every call.
  llm::GenerationParams base_params;
  // Keep rendered prompt text on each attempt.
  bool debug = false;
};

double temperature_for_attempt(const PipelineOptions& options, std::size_t index);
llm::GenerationParams params_for_attempt(const PipelineOptions& options, std::size_t index);

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pulls the SQL statement out of model output: the first fenced block if
// any, starting at the first SELECT/WITH keyword, cut after the last
// top-level semicolon. Throws ExtractionError if there is no SELECT/WITH.
std::string extract_sql(std::string_view raw_output);

enum class SessionStatus { kPending, kSqlFailed, kSucceeded, kSummarizing, kComplete };

std::string_view to_string(SessionStatus status);
std::optional<SessionStatus> session_status_from_string(std::string_view text);

struct ExecutionFailure {
  datasource::ExecutionErrorKind kind = datasource::ExecutionErrorKind::kOther;
  std::string message;

  bool operator==(const ExecutionFailure&) const = default;
};

struct ProviderFailure {
  llm::ProviderErrorKind kind = llm::ProviderErrorKind::kUnavailable;
  std::string message;

  bool operator==(const ProviderFailure&) const = default;
};

// One generate/validate/execute round. An attempt that never reached the
// guard (provider or extraction failure) carries an unparseable verdict.
struct GenerationAttempt {
  std::size_t index = 1;
  std::string prompt_fingerprint;
  std::string raw_output;
  std::string extracted_sql;
  sqlguard::ValidationVerdict verdict;
  std::optional<ExecutionFailure> execution_error;
  std::optional<std::string> extraction_error;
  std::optional<ProviderFailure> provider_error;
  llm::GenerationParams params_used;
  std::optional<std::string> prompt_text;

  bool succeeded() const {
    return verdict.accepted && !execution_error && !extraction_error && !provider_error;
  }
  bool operator==(const GenerationAttempt&) const = default;
};

struct ChartAttempt {
  std::size_t index = 1;
  std::string raw_output;
  std::optional<chart::VegaInvalidKind> error;
  std::optional<ProviderFailure> provider_error;
  std::string message;
  llm::GenerationParams params_used;

  bool operator==(const ChartAttempt&) const = default;
};

struct TemplateSet {
  prompting::PromptTemplate generation;
  prompting::PromptTemplate summarization;
  prompting::PromptTemplate visualization;

  static TemplateSet defaults();
  const prompting::PromptTemplate& get(prompting::TemplateKind kind) const;
  prompting::PromptTemplate& get(prompting::TemplateKind kind);
  bool operator==(const TemplateSet&) const = default;
};

struct QuerySession {
  std::string id;
  std::string datasource_id;
  std::string question;
  std::vector<GenerationAttempt> attempts;
  std::vector<GenerationAttempt> edit_attempts;
  std::optional<std::string> final_sql;
  std::optional<datasource::ResultTable> table;
  std::optional<std::string> summary;
  std::optional<ProviderFailure> summary_error;
  std::optional<chart::ChartSpec> chart;
  std::vector<ChartAttempt> chart_attempts;
  SessionStatus status = SessionStatus::kPending;
  // Non-fatal outcome worth showing, e.g. an exhausted instructed edit.
  std::optional<std::string> notice;
  // Fatal failure outside the attempt list, e.g. a non-retryable provider error.
  std::optional<std::string> error;
  // ISO-8601 UTC with milliseconds.
  std::string created_at;
  std::string updated_at;

  bool operator==(const QuerySession&) const = default;
};

std::string new_session_id();
std::string utc_timestamp_now();

// Receives a full copy of the session after every state change.
using SessionObserver = std::function<void(const QuerySession&)>;

// Raised by operations whose precondition on session state does not hold.
class SessionConflict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Orchestrator {
 public:
  Orchestrator(llm::Provider& provider, PipelineOptions options = {},
               SessionObserver observer = {});

  const PipelineOptions& options() const { return options_; }

  // Generation with retries, then stage two on success. Exhaustion is
  // reported as status sql-failed; a non-retryable provider error is
  // recorded, published, and rethrown.
  QuerySession run_query(const datasource::DataSource& source, const TemplateSet& templates,
                         std::string question, std::string session_id = {});

  // Summary and chart for a session holding a table. Never touches the table.
  void run_stage_two(QuerySession& session, const TemplateSet& templates);

  // Replaces final_sql/table with `sql` and reruns stage two. Throws
  // ValidationRejected or ExecutionError with the session untouched.
  void rerun_sql(QuerySession& session, const datasource::DataSource& source,
                 std::string_view sql, const TemplateSet& templates);

  // Asks the provider to rewrite final_sql per `instruction`, retrying up to
  // max_retries. On exhaustion the previous SQL and table stay and `notice`
  // says so. Throws std::invalid_argument for an empty instruction and
  // SessionConflict when there is no SQL to edit.
  void edit_with_instruction(QuerySession& session, const datasource::DataSource& source,
                             std::string_view instruction, const TemplateSet& templates);

 private:
  void publish(QuerySession& session);

  llm::Provider& provider_;
  PipelineOptions options_;
  SessionObserver observer_;
};

}  // namespace mirror::pipeline

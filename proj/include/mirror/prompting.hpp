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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mirror/datasource.hpp"

namespace mirror::prompting {

enum class TemplateKind { kGeneration, kSummarization, kVisualization };

std::string_view to_string(TemplateKind kind);
std::optional<TemplateKind> template_kind_from_string(std::string_view text);

// Body slots are literal `{metadata}`, `{query}` and `{result}`; `{{` and `}}`
// produce literal braces. Instructions are free-form text placed before the
// body verbatim.
struct PromptTemplate {
  std::string id;
  TemplateKind kind = TemplateKind::kGeneration;
  std::string body;
  std::string instructions;

  bool operator==(const PromptTemplate&) const = default;
};

struct RenderedPrompt {
  std::string text;
  std::size_t token_estimate = 0;
  std::string template_id;
  std::string inputs_fingerprint;

  bool operator==(const RenderedPrompt&) const = default;
};

enum class TemplateErrorKind { kMissingSlot, kDuplicateSlot, kUnknownSlot, kMalformed };

std::string_view to_string(TemplateErrorKind kind);

class TemplateError : public std::runtime_error {
 public:
  TemplateError(TemplateErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  TemplateErrorKind kind() const { return kind_; }

 private:
  TemplateErrorKind kind_;
};

inline constexpr std::size_t kDefaultPromptRowCap = 20;
inline constexpr std::size_t kMaxSuggestions = 10;

// Throws TemplateError unless every slot of the template's kind appears
// exactly once and no other `{identifier}` slot is present.
void check_template(const PromptTemplate& tmpl);

// Shipped defaults, one per kind.
const PromptTemplate& default_template(TemplateKind kind);

// Template file: front matter with `id:` and `kind:` between `---` lines,
// then the body. An optional instructions section may precede the body,
// separated from it by a line containing only `---`.
PromptTemplate parse_template_file(std::string_view text);
std::string format_template_file(const PromptTemplate& tmpl);

// One `CREATE TABLE name (col TYPE, ...);` line per table in metadata order,
// with PRIMARY KEY and FOREIGN KEY constraint clauses. Empty for no tables.
std::string serialize_schema(const datasource::SchemaMetadata& meta);

// The {result} slot content: a header line and at most `row_cap` rows, pipe
// separated, followed by `... (N more rows omitted)` when rows were cut;
// `(no rows)` for an empty table.
std::string render_result_section(const datasource::ResultTable& table,
                                  std::size_t row_cap = kDefaultPromptRowCap);

std::string format_cell(const datasource::Cell& cell);

RenderedPrompt render_generation_prompt(const PromptTemplate& tmpl,
                                        const datasource::SchemaMetadata& meta,
                                        std::string_view question);

RenderedPrompt render_summarization_prompt(const PromptTemplate& tmpl,
                                           std::string_view question,
                                           const datasource::ResultTable& table,
                                           std::size_t row_cap = kDefaultPromptRowCap);

// Returned instead of a prompt when there is nothing to chart.
struct VisualizationSkipped {
  std::string reason;
};

// Like the summarization prompt, plus a block stating the chart grammar and
// the exact column names/types a chart may reference.
std::variant<RenderedPrompt, VisualizationSkipped> render_visualization_prompt(
    const PromptTemplate& tmpl, std::string_view question,
    const datasource::ResultTable& table, std::size_t row_cap = kDefaultPromptRowCap);

enum class SuggestionKind { kTable, kColumn };

std::string_view to_string(SuggestionKind kind);

struct Suggestion {
  std::string completion;
  SuggestionKind kind = SuggestionKind::kTable;
  std::optional<std::string> source_table;

  bool operator==(const Suggestion&) const = default;
};

// Identifiers whose lowercase form starts with the lowercase trailing word of
// `text_before_cursor`. Tables before columns, ties broken lexicographically,
// at most `limit` results.
std::vector<Suggestion> autocomplete(const datasource::SchemaMetadata& meta,
                                     std::string_view text_before_cursor,
                                     std::size_t limit = kMaxSuggestions);

}  // namespace mirror::prompting

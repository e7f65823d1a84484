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

#include "mirror/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_set>

#include "mirror/hash.hpp"

namespace mirror::prompting {
namespace {

using datasource::Cell;
using datasource::ResultTable;
using datasource::SchemaMetadata;

std::vector<std::string_view> slots_for(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kGeneration:
      return {"metadata", "query"};
    case TemplateKind::kSummarization:
    case TemplateKind::kVisualization:
      return {"query", "result"};
  }
  return {};
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Literal text or a slot reference.
struct Segment {
  bool is_slot = false;
  std::string text;
};

std::vector<Segment> scan_body(const PromptTemplate& tmpl) {
  const std::vector<std::string_view> allowed = slots_for(tmpl.kind);
  std::map<std::string, int, std::less<>> counts;
  std::vector<Segment> segments;
  std::string literal;
  const std::string& body = tmpl.body;

  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      literal.push_back('{');
      ++i;
      continue;
    }
    if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      literal.push_back('}');
      ++i;
      continue;
    }
    if (c == '{' && i + 1 < body.size() && is_ident_start(body[i + 1])) {
      std::size_t j = i + 1;
      while (j < body.size() && is_ident_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}') {
        std::string name = body.substr(i + 1, j - i - 1);
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
          throw TemplateError(TemplateErrorKind::kUnknownSlot,
                              "template '" + tmpl.id + "' has unknown slot {" + name +
                                  "} for kind " + std::string(to_string(tmpl.kind)));
        }
        if (++counts[name] > 1) {
          throw TemplateError(TemplateErrorKind::kDuplicateSlot,
                              "template '" + tmpl.id + "' repeats slot {" + name + "}");
        }
        if (!literal.empty()) segments.push_back({false, std::move(literal)});
        literal.clear();
        segments.push_back({true, std::move(name)});
        i = j;
        continue;
      }
    }
    literal.push_back(c);
  }
  if (!literal.empty()) segments.push_back({false, std::move(literal)});

  for (std::string_view slot : allowed) {
    if (counts.find(slot) == counts.end()) {
      throw TemplateError(TemplateErrorKind::kMissingSlot,
                          "template '" + tmpl.id + "' is missing slot {" +
                              std::string(slot) + "}");
    }
  }
  return segments;
}

std::string substitute(const std::vector<Segment>& segments,
                       const std::map<std::string, std::string_view, std::less<>>& values) {
  std::string out;
  for (const auto& segment : segments) {
    if (segment.is_slot) {
      out.append(values.at(segment.text));
    } else {
      out.append(segment.text);
    }
  }
  return out;
}

std::string join_sections(std::initializer_list<std::string_view> sections) {
  std::string out;
  for (std::string_view section : sections) {
    if (section.empty()) continue;
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
    out.append(section);
  }
  return out;
}

std::string fingerprint_fields(std::initializer_list<std::string_view> fields) {
  std::string canonical;
  for (std::string_view field : fields) {
    canonical += std::to_string(field.size());
    canonical.push_back(':');
    canonical.append(field);
  }
  return sha256_hex(canonical);
}

RenderedPrompt make_prompt(const PromptTemplate& tmpl, std::string text,
                           std::string inputs_fingerprint) {
  RenderedPrompt prompt;
  prompt.token_estimate = (text.size() + 3) / 4;
  prompt.text = std::move(text);
  prompt.template_id = tmpl.id;
  prompt.inputs_fingerprint = std::move(inputs_fingerprint);
  return prompt;
}

void require_kind(const PromptTemplate& tmpl, TemplateKind kind) {
  if (tmpl.kind != kind) {
    throw TemplateError(TemplateErrorKind::kMalformed,
                        "template '" + tmpl.id + "' is a " +
                            std::string(to_string(tmpl.kind)) + " template, expected " +
                            std::string(to_string(kind)));
  }
}

const std::unordered_set<std::string>& ddl_keywords() {
  static const std::unordered_set<std::string> kWords = {
      "all",    "alter",   "and",      "as",      "between", "by",     "case",
      "check",  "create",  "default",  "delete",  "distinct", "drop",  "else",
      "end",    "foreign", "from",     "group",   "having",  "in",     "index",
      "insert", "into",    "is",       "join",    "key",     "like",   "limit",
      "not",    "null",    "on",       "or",      "order",   "primary", "references",
      "select", "set",     "table",    "then",    "to",      "union",  "update",
      "values", "when",    "where",    "with",
  };
  return kWords;
}

std::string ddl_identifier(std::string_view name) {
  bool plain = !name.empty() && is_ident_start(name.front());
  for (char c : name) plain = plain && is_ident_char(c);
  if (plain) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!ddl_keywords().contains(lower)) return std::string(name);
  }
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string escape_pipes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string lower_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool suggestion_less(const Suggestion& a, const Suggestion& b) {
  if (a.kind != b.kind) return a.kind == SuggestionKind::kTable;
  const std::string la = lower_ascii(a.completion);
  const std::string lb = lower_ascii(b.completion);
  if (la != lb) return la < lb;
  if (a.completion != b.completion) return a.completion < b.completion;
  return a.source_table < b.source_table;
}

constexpr std::string_view kGenerationBody =
    "-- Language: SQLite\n"
    "-- Database schema:\n"
    "{metadata}\n"
    "\n"
    "-- Write one read-only SQLite SELECT statement that answers the question below.\n"
    "-- Use only the tables and columns listed above. Return only the SQL.\n"
    "-- Question: {query}\n"
    "-- SQL:";

constexpr std::string_view kSummarizationBody =
    "You are a data analyst. Answer the question in one or two sentences, using only\n"
    "the facts in the query result. Do not invent numbers.\n"
    "\n"
    "Question: {query}\n"
    "Query result:\n"
    "{result}\n"
    "\n"
    "Answer:";

constexpr std::string_view kVisualizationBody =
    "Write a Vega-Lite chart that helps answer the question using the query result.\n"
    "Respond with a single JSON object only, for example\n"
    "{{\"mark\": \"bar\", \"encoding\": {{\"x\": {{\"field\": \"<column>\", \"type\": \"nominal\"}}, "
    "\"y\": {{\"field\": \"<column>\", \"type\": \"quantitative\"}}}}}}\n"
    "\n"
    "Question: {query}\n"
    "Query result:\n"
    "{result}\n"
    "\n"
    "JSON:";

}  // namespace

std::string_view to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kGeneration:
      return "generation";
    case TemplateKind::kSummarization:
      return "summarization";
    case TemplateKind::kVisualization:
      return "visualization";
  }
  return "generation";
}

std::optional<TemplateKind> template_kind_from_string(std::string_view text) {
  for (auto kind : {TemplateKind::kGeneration, TemplateKind::kSummarization,
                    TemplateKind::kVisualization}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(TemplateErrorKind kind) {
  switch (kind) {
    case TemplateErrorKind::kMissingSlot:
      return "missing-slot";
    case TemplateErrorKind::kDuplicateSlot:
      return "duplicate-slot";
    case TemplateErrorKind::kUnknownSlot:
      return "unknown-slot";
    case TemplateErrorKind::kMalformed:
      return "malformed";
  }
  return "malformed";
}

std::string_view to_string(SuggestionKind kind) {
  return kind == SuggestionKind::kTable ? "table" : "column";
}

void check_template(const PromptTemplate& tmpl) { scan_body(tmpl); }

const PromptTemplate& default_template(TemplateKind kind) {
  static const PromptTemplate kGeneration{"default-generation", TemplateKind::kGeneration,
                                          std::string(kGenerationBody), ""};
  static const PromptTemplate kSummarization{"default-summarization",
                                             TemplateKind::kSummarization,
                                             std::string(kSummarizationBody), ""};
  static const PromptTemplate kVisualization{"default-visualization",
                                             TemplateKind::kVisualization,
                                             std::string(kVisualizationBody), ""};
  switch (kind) {
    case TemplateKind::kGeneration:
      return kGeneration;
    case TemplateKind::kSummarization:
      return kSummarization;
    case TemplateKind::kVisualization:
      return kVisualization;
  }
  return kGeneration;
}

PromptTemplate parse_template_file(std::string_view text) {
  auto next_line = [&text]() -> std::optional<std::string_view> {
    if (text.empty()) return std::nullopt;
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  auto first = next_line();
  if (!first || *first != "---") {
    throw TemplateError(TemplateErrorKind::kMalformed,
                        "template file must start with a '---' front matter line");
  }
  PromptTemplate tmpl;
  bool have_kind = false;
  bool closed = false;
  while (auto line = next_line()) {
    if (*line == "---") {
      closed = true;
      break;
    }
    const std::size_t colon = line->find(':');
    if (colon == std::string_view::npos) {
      throw TemplateError(TemplateErrorKind::kMalformed,
                          "front matter line without ':': " + std::string(*line));
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
      return s;
    };
    const std::string_view key = trim(line->substr(0, colon));
    const std::string_view value = trim(line->substr(colon + 1));
    if (key == "id") {
      tmpl.id = std::string(value);
    } else if (key == "kind") {
      const auto kind = template_kind_from_string(value);
      if (!kind) {
        throw TemplateError(TemplateErrorKind::kMalformed,
                            "unknown template kind: " + std::string(value));
      }
      tmpl.kind = *kind;
      have_kind = true;
    }
  }
  if (!closed || tmpl.id.empty() || !have_kind) {
    throw TemplateError(TemplateErrorKind::kMalformed,
                        "front matter needs id and kind and a closing '---'");
  }

  std::size_t separator = std::string_view::npos;
  std::size_t separator_length = 0;
  if (text.rfind("---\n", 0) == 0 || text == "---") {
    separator = 0;
    separator_length = text == "---" ? 3 : 4;
  } else if (const std::size_t at = text.find("\n---\n"); at != std::string_view::npos) {
    separator = at;
    separator_length = 5;
  }
  if (separator == std::string_view::npos) {
    tmpl.body = std::string(text);
  } else {
    tmpl.instructions = std::string(text.substr(0, separator));
    tmpl.body = std::string(text.substr(separator + separator_length));
  }
  check_template(tmpl);
  return tmpl;
}

std::string format_template_file(const PromptTemplate& tmpl) {
  std::string out = "---\nid: " + tmpl.id + "\nkind: " + std::string(to_string(tmpl.kind)) +
                    "\n---\n";
  const bool body_has_separator =
      tmpl.body.rfind("---\n", 0) == 0 || tmpl.body.find("\n---\n") != std::string::npos;
  if (!tmpl.instructions.empty()) {
    out += tmpl.instructions + "\n---\n";
  } else if (body_has_separator) {
    out += "---\n";
  }
  out += tmpl.body;
  return out;
}

std::string serialize_schema(const SchemaMetadata& meta) {
  std::string out;
  for (const auto& table : meta.tables) {
    if (!out.empty()) out.push_back('\n');
    out += "CREATE TABLE " + ddl_identifier(table.name) + " (";
    bool first = true;
    auto separator = [&] {
      if (!first) out += ", ";
      first = false;
    };
    for (const auto& column : table.columns) {
      separator();
      out += ddl_identifier(column.name);
      if (!column.sql_type.empty()) out += " " + column.sql_type;
      if (!column.nullable) out += " NOT NULL";
    }
    if (!table.primary_key.empty()) {
      separator();
      out += "PRIMARY KEY (";
      for (std::size_t i = 0; i < table.primary_key.size(); ++i) {
        if (i > 0) out += ", ";
        out += ddl_identifier(table.primary_key[i]);
      }
      out += ")";
    }
    for (const auto& fk : table.foreign_keys) {
      separator();
      out += "FOREIGN KEY (" + ddl_identifier(fk.column) + ") REFERENCES " +
             ddl_identifier(fk.foreign_table) + "(" + ddl_identifier(fk.foreign_column) + ")";
    }
    out += ");";
  }
  return out;
}

std::string format_cell(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "NULL";
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", *d);
    return buffer;
  }
  return escape_pipes(std::get<std::string>(cell));
}

std::string render_result_section(const ResultTable& table, std::size_t row_cap) {
  if (table.rows.empty()) return "(no rows)";
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += " | ";
    out += escape_pipes(table.columns[c].name);
  }
  const std::size_t shown = std::min(row_cap, table.rows.size());
  for (std::size_t r = 0; r < shown; ++r) {
    out.push_back('\n');
    const auto& row = table.rows[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += " | ";
      out += format_cell(row[c]);
    }
  }
  if (shown < table.rows.size()) {
    out += "\n... (" + std::to_string(table.rows.size() - shown) + " more rows omitted)";
  }
  return out;
}

RenderedPrompt render_generation_prompt(const PromptTemplate& tmpl, const SchemaMetadata& meta,
                                        std::string_view question) {
  require_kind(tmpl, TemplateKind::kGeneration);
  const auto segments = scan_body(tmpl);
  const std::string schema = serialize_schema(meta);
  const std::string body = substitute(segments, {{"metadata", schema}, {"query", question}});
  std::string text = join_sections({tmpl.instructions, body});
  return make_prompt(tmpl, std::move(text),
                     fingerprint_fields({"generation", tmpl.id, tmpl.instructions, tmpl.body,
                                         schema, question}));
}

RenderedPrompt render_summarization_prompt(const PromptTemplate& tmpl, std::string_view question,
                                           const ResultTable& table, std::size_t row_cap) {
  require_kind(tmpl, TemplateKind::kSummarization);
  const auto segments = scan_body(tmpl);
  const std::string result = render_result_section(table, row_cap);
  const std::string body = substitute(segments, {{"query", question}, {"result", result}});
  std::string text = join_sections({tmpl.instructions, body});
  return make_prompt(tmpl, std::move(text),
                     fingerprint_fields({"summarization", tmpl.id, tmpl.instructions,
                                         tmpl.body, question, result}));
}

std::variant<RenderedPrompt, VisualizationSkipped> render_visualization_prompt(
    const PromptTemplate& tmpl, std::string_view question, const ResultTable& table,
    std::size_t row_cap) {
  require_kind(tmpl, TemplateKind::kVisualization);
  const auto segments = scan_body(tmpl);
  if (table.rows.empty()) return VisualizationSkipped{"result table has no rows"};

  std::string grammar =
      "Chart grammar: one JSON object in the Vega-Lite dialect. \"mark\" is one of bar, "
      "line, area, point, arc. \"encoding\" maps the channels x, y, color, theta to "
      "{\"field\": <column name>, \"type\": <quantitative | nominal | ordinal | temporal>}. "
      "At least one of x, y, theta is required.\n"
      "Columns available to the chart (name: type):";
  for (const auto& column : table.columns) {
    grammar += "\n- " + column.name + ": " + std::string(to_string(column.type));
  }

  const std::string result = render_result_section(table, row_cap);
  const std::string body = substitute(segments, {{"query", question}, {"result", result}});
  std::string text = join_sections({tmpl.instructions, grammar, body});
  return make_prompt(tmpl, std::move(text),
                     fingerprint_fields({"visualization", tmpl.id, tmpl.instructions,
                                         tmpl.body, question, grammar, result}));
}

std::vector<Suggestion> autocomplete(const SchemaMetadata& meta,
                                     std::string_view text_before_cursor, std::size_t limit) {
  std::size_t start = text_before_cursor.size();
  while (start > 0) {
    const auto c = static_cast<unsigned char>(text_before_cursor[start - 1]);
    if (!(std::isalnum(c) || c == '_' || c >= 0x80)) break;
    --start;
  }
  const std::string prefix = lower_ascii(text_before_cursor.substr(start));
  if (prefix.empty()) return {};

  auto matches = [&prefix](std::string_view name) {
    return lower_ascii(name).rfind(prefix, 0) == 0;
  };

  std::vector<Suggestion> out;
  std::map<std::string, std::string> columns;  // name -> first table
  for (const auto& table : meta.tables) {
    if (matches(table.name)) out.push_back({table.name, SuggestionKind::kTable, std::nullopt});
    for (const auto& column : table.columns) {
      if (!matches(column.name)) continue;
      auto [it, inserted] = columns.emplace(column.name, table.name);
      if (!inserted && table.name < it->second) it->second = table.name;
    }
  }
  for (auto& [name, table] : columns) {
    out.push_back({name, SuggestionKind::kColumn, table});
  }
  std::sort(out.begin(), out.end(), suggestion_less);
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace mirror::prompting

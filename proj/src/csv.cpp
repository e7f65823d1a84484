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

#include "mirror/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mirror::datasource::csv {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

CsvDocument parse(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record_lines.push_back(record_line);
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw DataSourceError(DataSourceErrorKind::kParseFailure,
                                "stray quote inside unquoted field on line " +
                                    std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        quote_line = line;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (in_quotes) {
    throw DataSourceError(DataSourceErrorKind::kParseFailure,
                          "unterminated quoted field starting on line " +
                              std::to_string(quote_line));
  }
  if (field_started || !record.empty()) end_record();

  // Drop trailing blank lines.
  while (!records.empty() && records.back().size() == 1 && records.back()[0].empty()) {
    records.pop_back();
    record_lines.pop_back();
  }
  if (records.empty()) {
    throw DataSourceError(DataSourceErrorKind::kEmptyFile, "CSV has no header row");
  }

  CsvDocument doc;
  doc.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != doc.header.size()) {
      throw DataSourceError(
          DataSourceErrorKind::kRaggedRows,
          "record on line " + std::to_string(record_lines[r]) + " has " +
              std::to_string(records[r].size()) + " fields, header has " +
              std::to_string(doc.header.size()));
    }
    doc.rows.push_back(std::move(records[r]));
  }
  return doc;
}

CsvDocument read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataSourceError(DataSourceErrorKind::kUnreachable,
                          "cannot read CSV file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool is_decimal_integer(std::string_view cell) {
  std::string_view digits = cell;
  if (!digits.empty() && (digits.front() == '+' || digits.front() == '-')) {
    digits.remove_prefix(1);
  }
  if (!all_digits(digits)) return false;
  std::int64_t value = 0;
  const char* begin = cell.data() + (cell.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

bool is_decimal_float(std::string_view cell) {
  std::string_view s = cell;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  const std::size_t exp = s.find_first_of("eE");
  std::string_view mantissa = s.substr(0, exp);
  if (exp != std::string_view::npos) {
    std::string_view exponent = s.substr(exp + 1);
    if (!exponent.empty() && (exponent.front() == '+' || exponent.front() == '-')) {
      exponent.remove_prefix(1);
    }
    if (!all_digits(exponent)) return false;
  }
  const std::size_t dot = mantissa.find('.');
  if (dot == std::string_view::npos) return all_digits(mantissa);
  const std::string_view whole = mantissa.substr(0, dot);
  const std::string_view frac = mantissa.substr(dot + 1);
  if (whole.empty() && frac.empty()) return false;
  return (whole.empty() || all_digits(whole)) && (frac.empty() || all_digits(frac));
}

TypeTag infer_column_type(const CsvDocument& doc, std::size_t column) {
  bool any = false;
  bool all_int = true;
  bool all_float = true;
  for (const auto& row : doc.rows) {
    const std::string& cell = row.at(column);
    if (cell.empty()) continue;
    any = true;
    if (all_int && !is_decimal_integer(cell)) all_int = false;
    if (all_float && !is_decimal_float(cell)) all_float = false;
    if (!all_int && !all_float) break;
  }
  if (!any) return TypeTag::kText;
  if (all_int) return TypeTag::kInteger;
  if (all_float) return TypeTag::kReal;
  return TypeTag::kText;
}

std::vector<std::string> unique_column_names(const std::vector<std::string>& header) {
  std::vector<std::string> names;
  std::set<std::string> used;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string base = header[i];
    if (base.find_first_not_of(" \t") == std::string::npos) {
      base = "column_" + std::to_string(i + 1);
    }
    std::string name = base;
    for (int suffix = 2; used.contains(name); ++suffix) {
      name = base + "_" + std::to_string(suffix);
    }
    used.insert(name);
    names.push_back(std::move(name));
  }
  return names;
}

}  // namespace mirror::datasource::csv

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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mirror/datasource.hpp"

namespace mirror::datasource::csv {

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma separator, double-quote quoting ("" escapes a quote), first record is
// the header, CRLF or LF line endings, optional UTF-8 BOM. Trailing blank lines
// are ignored.
// Throws DataSourceError{empty-file} when there is no header,
// {ragged-rows} when a record's arity differs from the header's, and
// {parse-failure} on an unterminated quote.
CsvDocument parse(std::string_view text);
CsvDocument read_file(const std::filesystem::path& path);

bool is_decimal_integer(std::string_view cell);
bool is_decimal_float(std::string_view cell);

// INTEGER if every non-empty cell is a decimal integer, else REAL if every
// non-empty cell is a decimal float, else TEXT. A column with no non-empty
// cells is TEXT.
TypeTag infer_column_type(const CsvDocument& doc, std::size_t column);

// Header names made unique (`name_2`, `name_3`, ...); blank names become
// `column_<n>` (1-based).
std::vector<std::string> unique_column_names(const std::vector<std::string>& header);

}  // namespace mirror::datasource::csv

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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mirror::sqlguard::detail {

enum class TokenKind {
  kWord,         // bare identifier or keyword
  kQuotedIdent,  // "name" or `name`
  kString,       // 'text'
  kBlob,         // X'0A1B'
  kNumber,
  kOperator,
  kSemicolon,
};

struct Token {
  TokenKind kind;
  // Keyword/identifier text as written for words, the unquoted value for
  // quoted identifiers and strings, raw text otherwise.
  std::string text;
  std::size_t offset = 0;
};

class LexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits SQL into tokens, dropping whitespace and comments. Throws LexError on
// unterminated literals/comments, bind parameters, and unknown characters.
std::vector<Token> tokenize(std::string_view sql);

std::string ascii_upper(std::string_view text);
std::string ascii_lower(std::string_view text);

}  // namespace mirror::sqlguard::detail

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

#include "sql_lexer.hpp"

#include <array>
#include <cctype>

namespace mirror::sqlguard::detail {
namespace {

bool is_word_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

// Longest operators first.
constexpr std::array<std::string_view, 26> kOperators = {
    "->>", "||", "->", "<=", ">=", "==", "!=", "<>", "<<", ">>",
    "*",   "/",  "%",  "+",  "-",  "<",  ">",  "=",  "&",  "|",
    "~",   ",",  "(",  ")",  ".",  "::"};

}  // namespace

std::string ascii_upper(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sql.size();

  auto quoted = [&](char close, TokenKind kind, const char* what) {
    const std::size_t start = i;
    std::string value;
    ++i;
    while (true) {
      if (i >= n) {
        throw LexError(std::string("unterminated ") + what + " at offset " +
                       std::to_string(start));
      }
      if (sql[i] == close) {
        if (i + 1 < n && sql[i + 1] == close) {
          value.push_back(close);
          i += 2;
          continue;
        }
        ++i;
        break;
      }
      value.push_back(sql[i++]);
    }
    tokens.push_back({kind, std::move(value), start});
  };

  while (i < n) {
    const auto c = static_cast<unsigned char>(sql[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const std::size_t close = sql.find("*/", i + 2);
      if (close == std::string_view::npos) {
        throw LexError("unterminated block comment at offset " +
                       std::to_string(i));
      }
      i = close + 2;
      continue;
    }
    if ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'') {
      const std::size_t start = i;
      ++i;
      quoted('\'', TokenKind::kBlob, "blob literal");
      tokens.back().offset = start;
      continue;
    }
    if (c == '\'') {
      quoted('\'', TokenKind::kString, "string literal");
      continue;
    }
    if (c == '"') {
      quoted('"', TokenKind::kQuotedIdent, "quoted identifier");
      continue;
    }
    if (c == '`') {
      quoted('`', TokenKind::kQuotedIdent, "quoted identifier");
      continue;
    }
    if (c == '[') {
      const std::size_t close = sql.find(']', i + 1);
      if (close == std::string_view::npos) {
        throw LexError("unterminated bracket identifier at offset " +
                       std::to_string(i));
      }
      tokens.push_back({TokenKind::kQuotedIdent,
                        std::string(sql.substr(i + 1, close - i - 1)), i});
      i = close + 1;
      continue;
    }
    if (std::isdigit(c) ||
        (c == '.' && i + 1 < n &&
         std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      const std::size_t start = i;
      if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
        i += 2;
        while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
      } else {
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        if (i < n && sql[i] == '.') {
          ++i;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
        if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
          std::size_t j = i + 1;
          if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
          if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
            i = j;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
          }
        }
      }
      if (i < n && is_word_char(static_cast<unsigned char>(sql[i]))) {
        throw LexError("malformed number at offset " + std::to_string(start));
      }
      tokens.push_back(
          {TokenKind::kNumber, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (is_word_start(c)) {
      const std::size_t start = i;
      while (i < n && is_word_char(static_cast<unsigned char>(sql[i]))) ++i;
      tokens.push_back(
          {TokenKind::kWord, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (c == ';') {
      tokens.push_back({TokenKind::kSemicolon, ";", i});
      ++i;
      continue;
    }
    if (c == '?' || c == ':' || c == '@' || c == '$') {
      if (!(c == ':' && i + 1 < n && sql[i + 1] == ':')) {
        throw LexError("bind parameters are not allowed (offset " +
                       std::to_string(i) + ")");
      }
    }
    bool matched = false;
    for (std::string_view op : kOperators) {
      if (sql.substr(i, op.size()) == op) {
        tokens.push_back({TokenKind::kOperator, std::string(op), i});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw LexError("unexpected character '" + std::string(1, sql[i]) +
                     "' at offset " + std::to_string(i));
    }
  }
  return tokens;
}

}  // namespace mirror::sqlguard::detail

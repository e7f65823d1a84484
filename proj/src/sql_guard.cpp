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

#include "mirror/sql_guard.hpp"

#include <algorithm>
#include <span>
#include <unordered_set>
#include <vector>

#include "sql_lexer.hpp"

namespace mirror::sqlguard {
namespace {

using detail::ascii_lower;
using detail::ascii_upper;
using detail::Token;
using detail::TokenKind;

// Words that cannot be used as bare identifiers or aliases.
const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> kWords = {
      "ALL",      "ALTER",     "ANALYZE",  "AND",       "AS",
      "ASC",      "ATTACH",    "BEGIN",    "BETWEEN",   "BY",
      "CASE",     "CAST",      "COLLATE",  "COMMIT",    "CREATE",
      "CROSS",    "DELETE",    "DESC",     "DETACH",    "DISTINCT",
      "DROP",     "ELSE",      "END",      "ESCAPE",    "EXCEPT",
      "EXISTS",   "EXPLAIN",   "FILTER",   "FOR",       "FROM",
      "FULL",     "GLOB",      "GRANT",    "GROUP",     "HAVING",
      "IN",       "INDEX",     "INNER",    "INSERT",    "INTERSECT",
      "INTO",     "IS",        "ISNULL",   "JOIN",      "LEFT",
      "LIKE",     "LIMIT",     "MATCH",    "MERGE",     "NATURAL",
      "NOT",      "NOTNULL",   "NULL",     "OFFSET",    "ON",
      "OR",       "ORDER",     "OUTER",    "OVER",      "PARTITION",
      "PRAGMA",   "REGEXP",    "REINDEX",  "RELEASE",   "REPLACE",
      "RETURNING", "REVOKE",   "RIGHT",    "ROLLBACK",  "SAVEPOINT",
      "SELECT",   "SET",       "TABLE",    "THEN",      "TRIGGER",
      "TRUNCATE", "UNION",     "UPDATE",   "USING",     "VACUUM",
      "VALUES",   "VIEW",      "WHEN",     "WHERE",     "WINDOW",
      "WITH",     "RECURSIVE",
  };
  return kWords;
}

// Words that introduce a data-modifying, DDL, or administrative statement.
const std::unordered_set<std::string>& mutating_words() {
  static const std::unordered_set<std::string> kWords = {
      "ALTER",   "ANALYZE",  "ATTACH", "BEGIN",   "CALL",     "COMMIT",
      "COPY",    "CREATE",   "DELETE", "DETACH",  "DROP",     "EXEC",
      "EXECUTE", "GRANT",    "INSERT", "INTO",    "LOCK",     "MERGE",
      "PRAGMA",  "REINDEX",  "RELEASE", "REPLACE", "REVOKE",  "ROLLBACK",
      "SAVEPOINT", "SET",    "TRUNCATE", "UPDATE", "UPSERT",  "VACUUM",
  };
  return kWords;
}

// Functions with side effects or access outside the query's tables.
const std::unordered_set<std::string>& forbidden_functions() {
  static const std::unordered_set<std::string> kNames = {
      "load_extension", "writefile",  "readfile", "edit",
      "fts3_tokenizer", "pg_sleep",   "pg_read_file", "pg_read_binary_file",
      "lo_import",      "lo_export",  "dblink",   "dblink_exec",
      "sleep",          "benchmark",  "xp_cmdshell", "raise",
  };
  return kNames;
}

// Reserved words that double as ordinary scalar functions.
const std::unordered_set<std::string>& keyword_functions() {
  static const std::unordered_set<std::string> kNames = {
      "REPLACE", "LEFT", "RIGHT", "GLOB", "LIKE"};
  return kNames;
}

struct SyntaxError {
  std::string message;
};
struct ForbiddenConstruct {
  std::string message;
};
struct NotASelect {
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::span<const Token> tokens) : tokens_(tokens) {}

  // Parses the whole token span as one statement.
  void parse_root() {
    if (at_end()) throw SyntaxError{"empty statement"};
    if (!is_word("SELECT") && !is_word("WITH")) {
      throw NotASelect{"statement starts with '" + peek().text + "'"};
    }
    parse_select_statement(/*root=*/true);
    if (!at_end()) {
      const Token& tok = peek();
      if (tok.kind == TokenKind::kWord &&
          (word_upper(tok) == "INTO" || word_upper(tok) == "FOR")) {
        throw ForbiddenConstruct{"'" + tok.text + "' clause is not allowed"};
      }
      throw SyntaxError{"unexpected '" + tok.text + "' after statement"};
    }
  }

  std::set<std::string> take_tables() { return std::move(tables_); }

 private:
  // --- token helpers -------------------------------------------------------

  bool at_end(std::size_t ahead = 0) const {
    return pos_ + ahead >= tokens_.size();
  }

  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEnd{TokenKind::kSemicolon, "<end>", 0};
    return at_end(ahead) ? kEnd : tokens_[pos_ + ahead];
  }

  static std::string word_upper(const Token& tok) { return ascii_upper(tok.text); }

  bool is_word(std::string_view upper, std::size_t ahead = 0) const {
    if (at_end(ahead)) return false;
    const Token& tok = peek(ahead);
    return tok.kind == TokenKind::kWord && word_upper(tok) == upper;
  }

  bool is_op(std::string_view op, std::size_t ahead = 0) const {
    if (at_end(ahead)) return false;
    const Token& tok = peek(ahead);
    return tok.kind == TokenKind::kOperator && tok.text == op;
  }

  bool accept_word(std::string_view upper) {
    if (!is_word(upper)) return false;
    ++pos_;
    return true;
  }

  bool accept_op(std::string_view op) {
    if (!is_op(op)) return false;
    ++pos_;
    return true;
  }

  void expect_word(std::string_view upper) {
    if (!accept_word(upper)) fail("expected " + std::string(upper));
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    if (at_end()) throw SyntaxError{what + " at end of input"};
    const Token& tok = peek();
    if (tok.kind == TokenKind::kWord && mutating_words().contains(word_upper(tok))) {
      throw ForbiddenConstruct{"'" + tok.text + "' is not allowed in a query"};
    }
    throw SyntaxError{what + " near '" + tok.text + "'"};
  }

  bool is_identifier(std::size_t ahead = 0) const {
    if (at_end(ahead)) return false;
    const Token& tok = peek(ahead);
    if (tok.kind == TokenKind::kQuotedIdent) return true;
    return tok.kind == TokenKind::kWord && !reserved_words().contains(word_upper(tok));
  }

  std::string expect_identifier() {
    if (!is_identifier()) fail("expected identifier");
    return tokens_[pos_++].text;
  }

  bool starts_select(std::size_t ahead = 0) const {
    return is_word("SELECT", ahead) || is_word("WITH", ahead) ||
           is_word("VALUES", ahead);
  }

  void reject_mutation_here() const {
    if (at_end()) return;
    const Token& tok = peek();
    if (tok.kind == TokenKind::kWord && mutating_words().contains(word_upper(tok))) {
      throw ForbiddenConstruct{"data-modifying statement '" + tok.text +
                               "' inside a query"};
    }
  }

  // --- scopes ----------------------------------------------------------------

  bool is_cte_name(const std::string& name) const {
    const std::string lower = ascii_lower(name);
    for (const auto& scope : cte_scopes_) {
      if (std::find(scope.begin(), scope.end(), lower) != scope.end()) return true;
    }
    return false;
  }

  void reference_table(const std::string& name, bool qualified) {
    if (!qualified && is_cte_name(name)) return;
    tables_.insert(name);
  }

  // --- statements ------------------------------------------------------------

  void parse_select_statement(bool root = false) {
    const DepthGuard guard(*this);
    const bool has_with = accept_word("WITH");
    if (has_with) {
      cte_scopes_.emplace_back();
      accept_word("RECURSIVE");
      do {
        parse_cte();
      } while (accept_op(","));
      if (!starts_select() && !is_op("(")) {
        if (root) {
          throw NotASelect{"WITH clause body is '" + peek().text +
                           "', not SELECT"};
        }
        reject_mutation_here();
        fail("expected SELECT after WITH clause");
      }
    }
    parse_compound();
    if (accept_word("ORDER")) {
      expect_word("BY");
      parse_ordering_terms();
    }
    if (accept_word("LIMIT")) {
      parse_expr();
      if (accept_word("OFFSET") || accept_op(",")) parse_expr();
    }
    if (has_with) cte_scopes_.pop_back();
  }

  void parse_cte() {
    const std::string name = expect_identifier();
    if (accept_op("(")) {
      do {
        expect_identifier();
      } while (accept_op(","));
      expect_op(")");
    }
    expect_word("AS");
    if (accept_word("NOT")) {
      expect_word("MATERIALIZED");
    } else {
      accept_word("MATERIALIZED");
    }
    cte_scopes_.back().push_back(ascii_lower(name));
    expect_op("(");
    reject_mutation_here();
    parse_select_statement();
    expect_op(")");
  }

  void parse_compound() {
    parse_select_core();
    while (true) {
      if (accept_word("UNION")) {
        accept_word("ALL");
      } else if (!accept_word("INTERSECT") && !accept_word("EXCEPT")) {
        break;
      }
      parse_select_core();
    }
  }

  void parse_select_core() {
    if (accept_op("(")) {
      reject_mutation_here();
      parse_select_statement();
      expect_op(")");
      return;
    }
    if (accept_word("VALUES")) {
      do {
        expect_op("(");
        parse_expr_list();
        expect_op(")");
      } while (accept_op(","));
      return;
    }
    if (!accept_word("SELECT")) {
      reject_mutation_here();
      fail("expected SELECT");
    }
    if (!accept_word("DISTINCT")) accept_word("ALL");
    do {
      parse_result_column();
    } while (accept_op(","));
    if (is_word("INTO")) {
      throw ForbiddenConstruct{"SELECT ... INTO is not allowed"};
    }
    if (accept_word("FROM")) parse_from();
    if (accept_word("WHERE")) parse_expr();
    if (accept_word("GROUP")) {
      expect_word("BY");
      parse_expr_list();
    }
    if (accept_word("HAVING")) parse_expr();
    if (accept_word("WINDOW")) {
      do {
        expect_identifier();
        expect_word("AS");
        parse_window_definition();
      } while (accept_op(","));
    }
  }

  void parse_result_column() {
    if (accept_op("*")) return;
    if (is_identifier() && is_op(".", 1) && is_op("*", 2)) {
      pos_ += 3;
      return;
    }
    parse_expr();
    parse_optional_alias(/*allow_string=*/true);
  }

  void parse_optional_alias(bool allow_string) {
    if (accept_word("AS")) {
      if (allow_string && peek().kind == TokenKind::kString && !at_end()) {
        ++pos_;
        return;
      }
      expect_identifier();
      return;
    }
    if (is_identifier()) ++pos_;
  }

  void parse_from() {
    parse_table_or_subquery();
    while (true) {
      if (accept_op(",")) {
        parse_table_or_subquery();
        continue;
      }
      if (!parse_join_operator()) break;
      parse_table_or_subquery();
      if (accept_word("ON")) {
        parse_expr();
      } else if (accept_word("USING")) {
        expect_op("(");
        do {
          expect_identifier();
        } while (accept_op(","));
        expect_op(")");
      }
    }
  }

  bool parse_join_operator() {
    const std::size_t start = pos_;
    accept_word("NATURAL");
    if (accept_word("LEFT") || accept_word("RIGHT") || accept_word("FULL")) {
      accept_word("OUTER");
    } else if (!accept_word("INNER")) {
      accept_word("CROSS");
    }
    if (accept_word("JOIN")) return true;
    if (pos_ != start) fail("expected JOIN");
    return false;
  }

  void parse_table_or_subquery() {
    const DepthGuard guard(*this);
    if (accept_op("(")) {
      reject_mutation_here();
      if (starts_select()) {
        parse_select_statement();
      } else {
        parse_from();
      }
      expect_op(")");
      parse_optional_alias(/*allow_string=*/false);
      return;
    }
    std::string name = expect_identifier();
    bool qualified = false;
    if (accept_op(".")) {
      name = expect_identifier();
      qualified = true;
    }
    if (is_op("(")) {
      throw SyntaxError{"table-valued function '" + name + "' is not supported"};
    }
    reference_table(name, qualified);
    parse_optional_alias(/*allow_string=*/false);
    if (is_word("INDEXED") || (is_word("NOT") && is_word("INDEXED", 1))) {
      fail("index hints are not supported");
    }
  }

  void parse_ordering_terms() {
    do {
      parse_expr();
      if (!accept_word("ASC")) accept_word("DESC");
      if (accept_word("NULLS")) {
        if (!accept_word("FIRST")) expect_word("LAST");
      }
    } while (accept_op(","));
  }

  void parse_window_definition() {
    expect_op("(");
    if (is_identifier() && !is_word("PARTITION") && !is_word("ORDER") &&
        !is_word("ROWS") && !is_word("RANGE") && !is_word("GROUPS")) {
      ++pos_;
    }
    if (accept_word("PARTITION")) {
      expect_word("BY");
      parse_expr_list();
    }
    if (accept_word("ORDER")) {
      expect_word("BY");
      parse_ordering_terms();
    }
    if (accept_word("ROWS") || accept_word("RANGE") || accept_word("GROUPS")) {
      if (accept_word("BETWEEN")) {
        parse_frame_bound();
        expect_word("AND");
        parse_frame_bound();
      } else {
        parse_frame_bound();
      }
      if (accept_word("EXCLUDE")) {
        if (accept_word("NO")) {
          expect_word("OTHERS");
        } else if (accept_word("CURRENT")) {
          expect_word("ROW");
        } else if (!accept_word("GROUP")) {
          expect_word("TIES");
        }
      }
    }
    expect_op(")");
  }

  void parse_frame_bound() {
    if (accept_word("UNBOUNDED")) {
      if (!accept_word("PRECEDING")) expect_word("FOLLOWING");
      return;
    }
    if (accept_word("CURRENT")) {
      expect_word("ROW");
      return;
    }
    parse_bitwise();
    if (!accept_word("PRECEDING")) expect_word("FOLLOWING");
  }

  // --- expressions -----------------------------------------------------------

  void parse_expr_list() {
    do {
      parse_expr();
    } while (accept_op(","));
  }

  void parse_expr() {
    const DepthGuard guard(*this);
    parse_or();
  }

  void parse_or() {
    parse_and();
    while (accept_word("OR")) parse_and();
  }

  void parse_and() {
    parse_not();
    while (accept_word("AND")) parse_not();
  }

  void parse_not() {
    if (accept_word("NOT")) {
      const DepthGuard guard(*this);
      parse_not();
      return;
    }
    parse_comparison();
  }

  void parse_comparison() {
    parse_relational();
    while (true) {
      if (accept_op("=") || accept_op("==") || accept_op("!=") || accept_op("<>")) {
        parse_relational();
        continue;
      }
      if (accept_word("IS")) {
        accept_word("NOT");
        if (accept_word("DISTINCT")) expect_word("FROM");
        parse_relational();
        continue;
      }
      if (accept_word("ISNULL") || accept_word("NOTNULL")) continue;
      const bool negated = is_word("NOT") &&
                           (is_word("IN", 1) || is_word("LIKE", 1) ||
                            is_word("GLOB", 1) || is_word("REGEXP", 1) ||
                            is_word("MATCH", 1) || is_word("BETWEEN", 1) ||
                            is_word("NULL", 1));
      if (negated) ++pos_;
      if (negated && accept_word("NULL")) continue;
      if (accept_word("IN")) {
        parse_in_rhs();
        continue;
      }
      if (accept_word("LIKE") || accept_word("GLOB") || accept_word("REGEXP") ||
          accept_word("MATCH")) {
        parse_relational();
        if (accept_word("ESCAPE")) parse_relational();
        continue;
      }
      if (accept_word("BETWEEN")) {
        parse_relational();
        expect_word("AND");
        parse_relational();
        continue;
      }
      if (negated) fail("expected predicate after NOT");
      break;
    }
  }

  void parse_in_rhs() {
    if (accept_op("(")) {
      if (accept_op(")")) return;
      reject_mutation_here();
      if (starts_select()) {
        parse_select_statement();
      } else {
        parse_expr_list();
      }
      expect_op(")");
      return;
    }
    std::string name = expect_identifier();
    bool qualified = false;
    if (accept_op(".")) {
      name = expect_identifier();
      qualified = true;
    }
    if (is_op("(")) fail("table-valued functions are not supported");
    reference_table(name, qualified);
  }

  void parse_relational() {
    parse_bitwise();
    while (accept_op("<") || accept_op("<=") || accept_op(">") || accept_op(">=")) {
      parse_bitwise();
    }
  }

  void parse_bitwise() {
    parse_additive();
    while (accept_op("&") || accept_op("|") || accept_op("<<") || accept_op(">>")) {
      parse_additive();
    }
  }

  void parse_additive() {
    parse_multiplicative();
    while (accept_op("+") || accept_op("-")) parse_multiplicative();
  }

  void parse_multiplicative() {
    parse_concat();
    while (accept_op("*") || accept_op("/") || accept_op("%")) parse_concat();
  }

  void parse_concat() {
    parse_unary();
    while (accept_op("||") || accept_op("->") || accept_op("->>")) parse_unary();
  }

  void parse_unary() {
    if (accept_op("-") || accept_op("+") || accept_op("~")) {
      const DepthGuard guard(*this);
      parse_unary();
      return;
    }
    parse_primary();
    while (accept_word("COLLATE")) expect_identifier();
  }

  void parse_primary() {
    if (at_end()) fail("expected expression");
    const Token& tok = peek();
    switch (tok.kind) {
      case TokenKind::kNumber:
      case TokenKind::kString:
      case TokenKind::kBlob:
        ++pos_;
        return;
      case TokenKind::kSemicolon:
        fail("expected expression");
      case TokenKind::kOperator:
        if (accept_op("(")) {
          reject_mutation_here();
          if (starts_select()) {
            parse_select_statement();
          } else {
            parse_expr_list();
          }
          expect_op(")");
          return;
        }
        fail("expected expression");
      case TokenKind::kQuotedIdent:
        parse_reference_or_call();
        return;
      case TokenKind::kWord:
        break;
    }

    const std::string upper = word_upper(tok);
    if (upper == "NULL") {
      ++pos_;
      return;
    }
    if (upper == "EXISTS") {
      ++pos_;
      expect_op("(");
      reject_mutation_here();
      parse_select_statement();
      expect_op(")");
      return;
    }
    if (upper == "CASE") {
      ++pos_;
      if (!is_word("WHEN")) parse_expr();
      expect_word("WHEN");
      do {
        parse_expr();
        expect_word("THEN");
        parse_expr();
      } while (accept_word("WHEN"));
      if (accept_word("ELSE")) parse_expr();
      expect_word("END");
      return;
    }
    if (upper == "CAST") {
      ++pos_;
      expect_op("(");
      parse_expr();
      expect_word("AS");
      parse_type_name();
      expect_op(")");
      return;
    }
    if (keyword_functions().contains(upper) && is_op("(", 1)) {
      parse_function_call(ascii_lower(tok.text));
      return;
    }
    if (reserved_words().contains(upper)) fail("expected expression");
    parse_reference_or_call();
  }

  void parse_reference_or_call() {
    const Token& tok = peek();
    if (tok.kind == TokenKind::kWord && is_op("(", 1)) {
      parse_function_call(ascii_lower(tok.text));
      return;
    }
    expect_identifier();
    // column, table.column, or schema.table.column
    for (int parts = 1; parts < 3 && accept_op("."); ++parts) {
      expect_identifier();
    }
  }

  void parse_function_call(const std::string& name) {
    if (forbidden_functions().contains(name)) {
      throw ForbiddenConstruct{"function '" + name + "' is not allowed"};
    }
    pos_ += 1;
    expect_op("(");
    if (!accept_op(")")) {
      if (!accept_op("*")) {
        accept_word("DISTINCT");
        parse_expr_list();
        if (accept_word("ORDER")) {
          expect_word("BY");
          parse_ordering_terms();
        }
      }
      expect_op(")");
    }
    if (accept_word("FILTER")) {
      expect_op("(");
      expect_word("WHERE");
      parse_expr();
      expect_op(")");
    }
    if (accept_word("OVER")) {
      if (is_op("(")) {
        parse_window_definition();
      } else {
        expect_identifier();
      }
    }
  }

  void parse_type_name() {
    expect_identifier();
    while (is_identifier()) ++pos_;
    if (accept_op("(")) {
      accept_op("-") || accept_op("+");
      if (peek().kind != TokenKind::kNumber || at_end()) fail("expected type size");
      ++pos_;
      if (accept_op(",")) {
        accept_op("-") || accept_op("+");
        if (peek().kind != TokenKind::kNumber || at_end()) fail("expected type size");
        ++pos_;
      }
      expect_op(")");
    }
  }

  static constexpr int kMaxDepth = 200;

  struct DepthGuard {
    explicit DepthGuard(Parser& parser) : parser(parser) {
      if (++parser.depth_ > kMaxDepth) throw SyntaxError{"nesting too deep"};
    }
    ~DepthGuard() { --parser.depth_; }
    DepthGuard(const DepthGuard&) = delete;
    DepthGuard& operator=(const DepthGuard&) = delete;
    Parser& parser;
  };

  std::span<const Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<std::vector<std::string>> cte_scopes_;
  std::set<std::string> tables_;
};

ValidationVerdict reject(VerdictReason reason, std::string detail) {
  ValidationVerdict verdict;
  verdict.accepted = false;
  verdict.reason = reason;
  verdict.detail = std::move(detail);
  return verdict;
}

bool contains_mutating_word(std::span<const Token> tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    if (tok.kind != TokenKind::kWord) continue;
    const std::string upper = ascii_upper(tok.text);
    if (!mutating_words().contains(upper)) continue;
    const bool used_as_function =
        keyword_functions().contains(upper) && i + 1 < tokens.size() &&
        tokens[i + 1].kind == TokenKind::kOperator && tokens[i + 1].text == "(";
    if (!used_as_function) return true;
  }
  return false;
}

struct Analysis {
  ValidationVerdict verdict;
  bool parsed = false;
};

Analysis analyze(std::string_view sql) {
  Analysis result;
  std::vector<Token> tokens;
  try {
    tokens = detail::tokenize(sql);
  } catch (const detail::LexError& e) {
    result.verdict = reject(VerdictReason::kUnparseable, e.what());
    return result;
  }

  // One trailing semicolon is tolerated; any other semicolon separates
  // statements.
  std::size_t statement_end = tokens.size();
  if (!tokens.empty() && tokens.back().kind == TokenKind::kSemicolon) {
    --statement_end;
  }
  for (std::size_t i = 0; i < statement_end; ++i) {
    if (tokens[i].kind == TokenKind::kSemicolon) {
      result.verdict = reject(VerdictReason::kMultipleStatements,
                              "more than one statement (semicolon at offset " +
                                  std::to_string(tokens[i].offset) + ")");
      return result;
    }
  }
  const std::span<const Token> statement(tokens.data(), statement_end);
  if (statement.empty()) {
    result.verdict = reject(VerdictReason::kUnparseable, "empty statement");
    return result;
  }

  Parser parser(statement);
  try {
    parser.parse_root();
  } catch (const NotASelect& e) {
    result.verdict = reject(VerdictReason::kNotASelect, e.message);
    return result;
  } catch (const ForbiddenConstruct& e) {
    result.verdict = reject(VerdictReason::kForbiddenConstruct, e.message);
    return result;
  } catch (const SyntaxError& e) {
    if (contains_mutating_word(statement)) {
      result.verdict = reject(VerdictReason::kForbiddenConstruct,
                              "data-modifying keyword in statement: " + e.message);
    } else {
      result.verdict = reject(VerdictReason::kUnparseable, e.message);
    }
    return result;
  }

  result.parsed = true;
  result.verdict.accepted = true;
  result.verdict.reason = VerdictReason::kOk;
  result.verdict.referenced_tables = parser.take_tables();
  return result;
}

}  // namespace

std::string_view to_string(VerdictReason reason) {
  switch (reason) {
    case VerdictReason::kOk:
      return "ok";
    case VerdictReason::kNotASelect:
      return "not-a-select";
    case VerdictReason::kMultipleStatements:
      return "multiple-statements";
    case VerdictReason::kUnparseable:
      return "unparseable";
    case VerdictReason::kForbiddenConstruct:
      return "forbidden-construct";
  }
  return "unparseable";
}

std::optional<VerdictReason> reason_from_string(std::string_view text) {
  for (auto reason : {VerdictReason::kOk, VerdictReason::kNotASelect,
                      VerdictReason::kMultipleStatements,
                      VerdictReason::kUnparseable,
                      VerdictReason::kForbiddenConstruct}) {
    if (to_string(reason) == text) return reason;
  }
  return std::nullopt;
}

ValidationVerdict validate(std::string_view sql) { return analyze(sql).verdict; }

std::set<std::string> referenced_identifiers(std::string_view sql) {
  Analysis analysis = analyze(sql);
  if (!analysis.parsed) {
    throw ParseError(std::string(to_string(analysis.verdict.reason)) + ": " +
                     analysis.verdict.detail);
  }
  return std::move(analysis.verdict.referenced_tables);
}

ValidationRejected::ValidationRejected(ValidationVerdict verdict)
    : std::runtime_error("SQL rejected (" + std::string(to_string(verdict.reason)) +
                         "): " + verdict.detail),
      verdict_(std::move(verdict)) {}

ValidatedSql ValidatedSql::accept(std::string sql) {
  ValidationVerdict verdict = validate(sql);
  if (!verdict.accepted) throw ValidationRejected(std::move(verdict));
  return ValidatedSql(std::move(sql), std::move(verdict));
}

}  // namespace mirror::sqlguard

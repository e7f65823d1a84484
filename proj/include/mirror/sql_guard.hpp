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
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mirror::sqlguard {

enum class VerdictReason {
  kOk,
  kNotASelect,
  kMultipleStatements,
  kUnparseable,
  kForbiddenConstruct,
};

std::string_view to_string(VerdictReason reason);
std::optional<VerdictReason> reason_from_string(std::string_view text);

struct ValidationVerdict {
  bool accepted = false;
  VerdictReason reason = VerdictReason::kUnparseable;
  // Tables named in FROM/JOIN/IN clauses, CTE names excluded. Filled whenever
  // the statement parsed, even if it was then rejected.
  std::set<std::string> referenced_tables;
  // Human-readable explanation of a rejection; empty when accepted.
  std::string detail;

  bool operator==(const ValidationVerdict&) const = default;
};

// Accepts exactly one statement rooted at SELECT (or WITH ... SELECT) that
// contains no data-modifying, DDL, or administrative construct anywhere.
// Pure and deterministic; never throws.
ValidationVerdict validate(std::string_view sql);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Table identifiers referenced by a single parseable statement, CTE names
// excluded. Throws ParseError if the input does not parse.
std::set<std::string> referenced_identifiers(std::string_view sql);

// Raised when SQL that was supposed to be executed failed validation.
class ValidationRejected : public std::runtime_error {
 public:
  explicit ValidationRejected(ValidationVerdict verdict);
  const ValidationVerdict& verdict() const { return verdict_; }

 private:
  ValidationVerdict verdict_;
};

// SQL text that has passed validate(). The only way to obtain one is through
// accept(), so holding a ValidatedSql is proof of acceptance.
class ValidatedSql {
 public:
  // Throws ValidationRejected if `sql` is not accepted.
  static ValidatedSql accept(std::string sql);

  const std::string& text() const { return text_; }
  const ValidationVerdict& verdict() const { return verdict_; }

 private:
  ValidatedSql(std::string text, ValidationVerdict verdict)
      : text_(std::move(text)), verdict_(std::move(verdict)) {}

  std::string text_;
  ValidationVerdict verdict_;
};

}  // namespace mirror::sqlguard

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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mirror/prompting.hpp"

namespace mirror::llm {

struct GenerationParams {
  double temperature = 0.2;  // >= 0
  double top_p = 1.0;        // (0, 1]
  std::size_t max_output_tokens = 512;
  std::vector<std::string> stop_sequences;
  std::optional<std::int64_t> seed_hint;

  bool operator==(const GenerationParams&) const = default;
};

// Throws std::invalid_argument when a field is out of range.
void check_params(const GenerationParams& params);

enum class FinishReason { kStop, kLength, kError };

std::string_view to_string(FinishReason reason);

struct ProviderResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  std::chrono::milliseconds latency{0};
  std::string provider_id;
};

enum class ProviderErrorKind { kTimeout, kAuth, kRateLimit, kMalformedResponse, kUnavailable };

std::string_view to_string(ProviderErrorKind kind);

class ProviderError : public std::runtime_error {
 public:
  // Auth errors are not retryable; other kinds are unless overridden.
  ProviderError(ProviderErrorKind kind, const std::string& message,
                std::optional<bool> retryable = std::nullopt);
  ProviderErrorKind kind() const { return kind_; }
  // Whether the orchestrator may spend another attempt after this error.
  bool retryable() const { return retryable_; }

 private:
  ProviderErrorKind kind_;
  bool retryable_;
};

// Text generation service with the two capabilities the pipeline uses.
// Implementations never retry internally.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string_view id() const = 0;

  // Throws std::invalid_argument on an empty prompt, ProviderError otherwise.
  virtual ProviderResponse complete(const prompting::RenderedPrompt& prompt,
                                    const GenerationParams& params) = 0;

  // Throws std::invalid_argument if either argument is empty.
  virtual ProviderResponse edit(std::string_view input_text, std::string_view instruction,
                                const GenerationParams& params) = 0;
};

// Cuts `text` at the earliest occurrence of any stop sequence.
std::string strip_stop_sequences(std::string text, const std::vector<std::string>& stops);

// ---------------------------------------------------------------------------
// Scripted provider

enum class CallKind { kComplete, kEdit };

std::string_view to_string(CallKind kind);

struct TranscriptEntry {
  enum class Match {
    kAny,        // matches every call
    kSubstring,  // key is a substring of the call's match text
    kHash,       // key is the sha256 hex of the call's match text
  };

  Match match = Match::kAny;
  std::string key;
  // Restrict to one call kind; any kind when unset.
  std::optional<CallKind> call_kind;
  std::string response;
  // Return the edit input unchanged instead of `response`.
  bool echo_input = false;
  // Raise this error instead of responding.
  std::optional<ProviderErrorKind> error;
};

struct CallRecord {
  CallKind kind;
  // Prompt text for complete; input, newline, instruction for edit.
  std::string match_text;
  GenerationParams params;
  // Index of the consumed transcript entry, or none when nothing matched.
  std::optional<std::size_t> entry_index;
};

// Deterministic test double. Each call consumes the first unconsumed entry
// that matches it; a call with no matching entry fails with
// ProviderError{malformed-response}.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::vector<TranscriptEntry> transcript);

  // Transcript JSON: an array (or {"entries": [...]}) of objects with
  // "response" and optional "match" ("*", "substring:<text>", "hash:<hex>"),
  // "op" ("complete" | "edit"), "echo" (bool), "error" (kind name).
  static std::unique_ptr<ScriptedProvider> from_json_text(std::string_view json_text);
  static std::unique_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);

  std::string_view id() const override { return "scripted"; }

  ProviderResponse complete(const prompting::RenderedPrompt& prompt,
                            const GenerationParams& params) override;
  ProviderResponse edit(std::string_view input_text, std::string_view instruction,
                        const GenerationParams& params) override;

  std::vector<CallRecord> call_log() const;
  std::size_t calls(CallKind kind) const;
  std::size_t remaining() const;

 private:
  ProviderResponse respond(CallKind kind, std::string match_text, std::string_view input,
                           const GenerationParams& params);

  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> transcript_;
  std::vector<bool> consumed_;
  std::vector<CallRecord> log_;
};

// ---------------------------------------------------------------------------
// HTTP provider

struct HttpProviderConfig {
  // Base URL, e.g. "http://127.0.0.1:8000" or "https://api.example.com".
  std::string base_url;
  std::string completion_path = "/v1/completions";
  std::string edit_path = "/v1/edits";
  std::string model;
  std::string edit_model;
  std::string api_key;  // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{60'000};
};

// Completion-style JSON endpoint client. Request bodies carry "prompt" (or
// "input"/"instruction"), "temperature", "top_p", "max_tokens", "stop" and
// optionally "model" and "seed"; responses are read from
// choices[0].text / choices[0].finish_reason.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  std::string_view id() const override { return "http"; }

  ProviderResponse complete(const prompting::RenderedPrompt& prompt,
                            const GenerationParams& params) override;
  ProviderResponse edit(std::string_view input_text, std::string_view instruction,
                        const GenerationParams& params) override;

 private:
  ProviderResponse post(const std::string& path, const std::string& body,
                        const GenerationParams& params);

  HttpProviderConfig config_;
};

// Key from MIRROR_API_KEY when set, else `fallback`.
std::string api_key_from_environment(std::string fallback);

}  // namespace mirror::llm

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

#include "mirror/llm_provider.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mirror/hash.hpp"

namespace mirror::llm {
namespace {

using nlohmann::json;

bool is_retryable(ProviderErrorKind kind) { return kind != ProviderErrorKind::kAuth; }

std::optional<ProviderErrorKind> error_kind_from_string(std::string_view text) {
  for (auto kind : {ProviderErrorKind::kTimeout, ProviderErrorKind::kAuth,
                    ProviderErrorKind::kRateLimit, ProviderErrorKind::kMalformedResponse,
                    ProviderErrorKind::kUnavailable}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

bool entry_matches(const TranscriptEntry& entry, CallKind kind, const std::string& text) {
  if (entry.call_kind && *entry.call_kind != kind) return false;
  switch (entry.match) {
    case TranscriptEntry::Match::kAny:
      return true;
    case TranscriptEntry::Match::kSubstring:
      return text.find(entry.key) != std::string::npos;
    case TranscriptEntry::Match::kHash:
      return sha256_hex(text) == entry.key;
  }
  return false;
}

}  // namespace

void check_params(const GenerationParams& params) {
  if (!(params.temperature >= 0.0) || !std::isfinite(params.temperature)) {
    throw std::invalid_argument("temperature must be >= 0");
  }
  if (!(params.top_p > 0.0 && params.top_p <= 1.0)) {
    throw std::invalid_argument("top_p must be in (0, 1]");
  }
  if (params.max_output_tokens == 0) {
    throw std::invalid_argument("max_output_tokens must be positive");
  }
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop:
      return "stop";
    case FinishReason::kLength:
      return "length";
    case FinishReason::kError:
      return "error";
  }
  return "error";
}

std::string_view to_string(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::kTimeout:
      return "timeout";
    case ProviderErrorKind::kAuth:
      return "auth";
    case ProviderErrorKind::kRateLimit:
      return "rate-limit";
    case ProviderErrorKind::kMalformedResponse:
      return "malformed-response";
    case ProviderErrorKind::kUnavailable:
      return "unavailable";
  }
  return "unavailable";
}

std::string_view to_string(CallKind kind) {
  return kind == CallKind::kComplete ? "complete" : "edit";
}

ProviderError::ProviderError(ProviderErrorKind kind, const std::string& message,
                             std::optional<bool> retryable)
    : std::runtime_error(message),
      kind_(kind),
      retryable_(retryable.value_or(is_retryable(kind))) {}

std::string strip_stop_sequences(std::string text, const std::vector<std::string>& stops) {
  std::size_t cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  text.resize(cut);
  return text;
}

std::string api_key_from_environment(std::string fallback) {
  if (const char* key = std::getenv("MIRROR_API_KEY"); key != nullptr && *key != '\0') {
    return key;
  }
  return fallback;
}

// ---------------------------------------------------------------------------
// ScriptedProvider

ScriptedProvider::ScriptedProvider(std::vector<TranscriptEntry> transcript)
    : transcript_(std::move(transcript)), consumed_(transcript_.size(), false) {}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_json_text(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("transcript is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("entries")) doc = doc.at("entries");
  if (!doc.is_array()) throw std::invalid_argument("transcript must be a JSON array");

  std::vector<TranscriptEntry> entries;
  for (const auto& item : doc) {
    TranscriptEntry entry;
    if (item.is_string()) {
      entry.response = item.get<std::string>();
      entries.push_back(std::move(entry));
      continue;
    }
    if (!item.is_object()) throw std::invalid_argument("transcript entry must be an object");
    entry.response = item.value("response", "");
    entry.echo_input = item.value("echo", false);
    const std::string match = item.value("match", "*");
    if (match == "*" || match.empty()) {
      entry.match = TranscriptEntry::Match::kAny;
    } else if (match.rfind("substring:", 0) == 0) {
      entry.match = TranscriptEntry::Match::kSubstring;
      entry.key = match.substr(10);
    } else if (match.rfind("hash:", 0) == 0) {
      entry.match = TranscriptEntry::Match::kHash;
      entry.key = match.substr(5);
    } else {
      throw std::invalid_argument("unknown transcript match rule: " + match);
    }
    if (item.contains("op")) {
      const std::string op = item.at("op").get<std::string>();
      if (op == "complete") {
        entry.call_kind = CallKind::kComplete;
      } else if (op == "edit") {
        entry.call_kind = CallKind::kEdit;
      } else {
        throw std::invalid_argument("unknown transcript op: " + op);
      }
    }
    if (item.contains("error")) {
      const auto kind = error_kind_from_string(item.at("error").get<std::string>());
      if (!kind) throw std::invalid_argument("unknown provider error kind in transcript");
      entry.error = kind;
    }
    entries.push_back(std::move(entry));
  }
  return std::make_unique<ScriptedProvider>(std::move(entries));
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read transcript " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

ProviderResponse ScriptedProvider::complete(const prompting::RenderedPrompt& prompt,
                                            const GenerationParams& params) {
  if (prompt.text.empty()) throw std::invalid_argument("prompt is empty");
  check_params(params);
  return respond(CallKind::kComplete, prompt.text, {}, params);
}

ProviderResponse ScriptedProvider::edit(std::string_view input_text,
                                        std::string_view instruction,
                                        const GenerationParams& params) {
  if (input_text.empty()) throw std::invalid_argument("edit input is empty");
  if (instruction.empty()) throw std::invalid_argument("edit instruction is empty");
  check_params(params);
  std::string match_text(input_text);
  match_text.push_back('\n');
  match_text.append(instruction);
  return respond(CallKind::kEdit, std::move(match_text), input_text, params);
}

ProviderResponse ScriptedProvider::respond(CallKind kind, std::string match_text,
                                           std::string_view input,
                                           const GenerationParams& params) {
  std::lock_guard lock(mutex_);
  CallRecord record{kind, std::move(match_text), params, std::nullopt};
  for (std::size_t i = 0; i < transcript_.size(); ++i) {
    if (consumed_[i] || !entry_matches(transcript_[i], kind, record.match_text)) continue;
    consumed_[i] = true;
    record.entry_index = i;
    log_.push_back(record);
    const TranscriptEntry& entry = transcript_[i];
    if (entry.error) {
      throw ProviderError(*entry.error, "scripted " + std::string(to_string(*entry.error)) +
                                            " (entry " + std::to_string(i) + ")");
    }
    ProviderResponse response;
    response.text = strip_stop_sequences(
        entry.echo_input ? std::string(input) : entry.response, params.stop_sequences);
    response.finish_reason = FinishReason::kStop;
    response.provider_id = "scripted";
    return response;
  }
  log_.push_back(std::move(record));
  // A script that runs dry is a broken test setup; stop the pipeline.
  throw ProviderError(ProviderErrorKind::kMalformedResponse,
                      "scripted transcript has no entry for this " +
                          std::string(to_string(kind)) + " call",
                      /*retryable=*/false);
}

std::vector<CallRecord> ScriptedProvider::call_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t ScriptedProvider::calls(CallKind kind) const {
  std::lock_guard lock(mutex_);
  std::size_t count = 0;
  for (const auto& record : log_) count += record.kind == kind ? 1 : 0;
  return count;
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t count = 0;
  for (bool used : consumed_) count += used ? 0 : 1;
  return count;
}

// ---------------------------------------------------------------------------
// HttpProvider

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw std::invalid_argument("provider base_url is empty");
}

ProviderResponse HttpProvider::complete(const prompting::RenderedPrompt& prompt,
                                        const GenerationParams& params) {
  if (prompt.text.empty()) throw std::invalid_argument("prompt is empty");
  check_params(params);
  json body = {{"prompt", prompt.text},
               {"temperature", params.temperature},
               {"top_p", params.top_p},
               {"max_tokens", params.max_output_tokens},
               {"stop", params.stop_sequences}};
  if (!config_.model.empty()) body["model"] = config_.model;
  if (params.seed_hint) body["seed"] = *params.seed_hint;
  return post(config_.completion_path, body.dump(), params);
}

ProviderResponse HttpProvider::edit(std::string_view input_text, std::string_view instruction,
                                    const GenerationParams& params) {
  if (input_text.empty()) throw std::invalid_argument("edit input is empty");
  if (instruction.empty()) throw std::invalid_argument("edit instruction is empty");
  check_params(params);
  json body = {{"input", input_text},
               {"instruction", instruction},
               {"temperature", params.temperature},
               {"top_p", params.top_p}};
  const std::string& model = config_.edit_model.empty() ? config_.model : config_.edit_model;
  if (!model.empty()) body["model"] = model;
  if (params.seed_hint) body["seed"] = *params.seed_hint;
  return post(config_.edit_path, body.dump(), params);
}

ProviderResponse HttpProvider::post(const std::string& path, const std::string& body,
                                    const GenerationParams& params) {
  httplib::Client client(config_.base_url);
  if (!client.is_valid()) {
    throw ProviderError(ProviderErrorKind::kUnavailable,
                        "invalid provider URL: " + config_.base_url);
  }
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), static_cast<time_t>(micros.count()));
  client.set_read_timeout(seconds.count(), static_cast<time_t>(micros.count()));
  client.set_write_timeout(seconds.count(), static_cast<time_t>(micros.count()));

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const auto started = std::chrono::steady_clock::now();
  const auto result = client.Post(path, headers, body, "application/json");
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  if (!result) {
    const auto error = result.error();
    if (error == httplib::Error::Read || error == httplib::Error::Write ||
        error == httplib::Error::ConnectionTimeout) {
      throw ProviderError(ProviderErrorKind::kTimeout,
                          "provider request timed out: " + httplib::to_string(error));
    }
    throw ProviderError(ProviderErrorKind::kUnavailable,
                        "provider request failed: " + httplib::to_string(error));
  }
  const int status = result->status;
  if (status == 401 || status == 403) {
    throw ProviderError(ProviderErrorKind::kAuth,
                        "provider rejected credentials (HTTP " + std::to_string(status) + ")");
  }
  if (status == 429) {
    throw ProviderError(ProviderErrorKind::kRateLimit, "provider rate limit (HTTP 429)");
  }
  if (status == 408 || status == 504) {
    throw ProviderError(ProviderErrorKind::kTimeout,
                        "provider timeout (HTTP " + std::to_string(status) + ")");
  }
  if (status >= 500) {
    throw ProviderError(ProviderErrorKind::kUnavailable,
                        "provider error (HTTP " + std::to_string(status) + ")");
  }
  if (status < 200 || status >= 300) {
    throw ProviderError(ProviderErrorKind::kMalformedResponse,
                        "unexpected provider status " + std::to_string(status));
  }

  ProviderResponse response;
  response.latency = latency;
  response.provider_id = "http";
  try {
    const json doc = json::parse(result->body);
    const json& choice = doc.at("choices").at(0);
    response.text = choice.at("text").get<std::string>();
    const std::string finish = choice.value("finish_reason", std::string("stop"));
    response.finish_reason = finish == "length" ? FinishReason::kLength : FinishReason::kStop;
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::kMalformedResponse,
                        std::string("cannot read provider response: ") + e.what());
  }
  response.text = strip_stop_sequences(std::move(response.text), params.stop_sequences);
  return response;
}

}  // namespace mirror::llm

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

#include "mirror/api_server.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mirror/pipeline.hpp"
#include "mirror/prompting.hpp"
#include "mirror/serialization.hpp"
#include "mirror/session_store.hpp"

namespace mirror::server {
namespace {

using nlohmann::json;
using pipeline::QuerySession;
using pipeline::SessionStatus;
using prompting::TemplateKind;

constexpr char kRestartNotice[] = "interrupted by server restart";

void reply(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view reason,
                 const std::string& message) {
  reply(res, status, json{{"reason", std::string(reason)}, {"message", message}}.dump());
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  json doc = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    reply_error(res, 400, "bad-request", "request body must be a JSON object");
    return std::nullopt;
  }
  return doc;
}

std::optional<std::string> string_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_string()) return std::nullopt;
  return doc.at(key).get<std::string>();
}

bool is_blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

bool terminal(SessionStatus status) {
  return status == SessionStatus::kComplete || status == SessionStatus::kSqlFailed;
}

struct TemplateIds {
  std::string generation;
  std::string summarization;
  std::string visualization;

  json to_json() const {
    return {{"generation", generation},
            {"summarization", summarization},
            {"visualization", visualization}};
  }
  static TemplateIds of(const pipeline::TemplateSet& set) {
    return {set.generation.id, set.summarization.id, set.visualization.id};
  }
};

struct SessionEntry {
  // Set while a worker or an edit owns the session.
  std::atomic<bool> busy{false};
  mutable std::mutex state_mutex;
  QuerySession session;
  std::string snapshot;
  std::string schema_fingerprint;
  TemplateIds template_ids;
};

std::string record_text(const QuerySession& session, const std::string& fingerprint,
                        const TemplateIds& ids) {
  json record = serialization::to_json(session);
  record["schema_fingerprint"] = fingerprint;
  record["template_ids"] = ids.to_json();
  return record.dump();
}

// Clears `flag` on scope exit.
class BusyGuard {
 public:
  explicit BusyGuard(std::atomic<bool>& flag) : flag_(flag) {}
  ~BusyGuard() { flag_.store(false); }
  BusyGuard(const BusyGuard&) = delete;
  BusyGuard& operator=(const BusyGuard&) = delete;

 private:
  std::atomic<bool>& flag_;
};

}  // namespace

struct ApiServer::Impl {
  ServerConfig config;
  std::unique_ptr<llm::Provider> provider;
  SessionStore store;
  datasource::Registry registry;
  httplib::Server http;
  int bound_port = -1;

  std::mutex templates_mutex;
  // scope ("" = every source) -> kind -> template
  std::map<std::string, std::map<TemplateKind, prompting::PromptTemplate>> overrides;

  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;

  std::mutex workers_mutex;
  std::vector<std::thread> workers;

  Impl(ServerConfig cfg, std::unique_ptr<llm::Provider> p)
      : config(std::move(cfg)), provider(std::move(p)), store(config.store_path) {}

  // ---- state ----------------------------------------------------------------

  pipeline::TemplateSet templates_for(const std::string& datasource_id) {
    auto set = pipeline::TemplateSet::defaults();
    std::lock_guard lock(templates_mutex);
    for (const std::string& scope : {std::string(), datasource_id}) {
      const auto it = overrides.find(scope);
      if (it == overrides.end()) continue;
      for (const auto& [kind, tmpl] : it->second) set.get(kind) = tmpl;
    }
    return set;
  }

  std::shared_ptr<SessionEntry> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Persists, then makes the record visible, so a client never reads a state
  // the store does not hold. With `release_when_terminal`, a terminal record
  // and the cleared busy flag become visible together.
  void publish(const std::shared_ptr<SessionEntry>& entry, const QuerySession& session,
               bool release_when_terminal = false) {
    std::string record;
    {
      std::lock_guard lock(entry->state_mutex);
      record = record_text(session, entry->schema_fingerprint, entry->template_ids);
    }
    try {
      store.put_session(session.id, record);
    } catch (const std::exception& e) {
      std::cerr << "mirror: failed to persist session " << session.id << ": " << e.what()
                << "\n";
    }
    std::lock_guard lock(entry->state_mutex);
    entry->session = session;
    entry->snapshot = std::move(record);
    if (release_when_terminal && terminal(session.status)) entry->busy = false;
  }

  pipeline::PipelineOptions options(bool debug) const {
    pipeline::PipelineOptions opts = config.pipeline;
    opts.debug = opts.debug || debug;
    return opts;
  }

  void spawn(std::function<void()> work) {
    std::lock_guard lock(workers_mutex);
    workers.emplace_back(std::move(work));
  }

  datasource::DataSourceConfig with_defaults(datasource::DataSourceConfig ds,
                                             const json& doc) const {
    if (!doc.contains("row_limit")) ds.row_limit = config.row_limit;
    if (!doc.contains("timeout_ms")) ds.timeout = config.query_timeout;
    return ds;
  }

  // ---- startup --------------------------------------------------------------

  void restore() {
    for (const auto& ds : config.datasources) {
      try {
        registry.register_source(ds);
      } catch (const datasource::DataSourceError& e) {
        throw ConfigError("data source '" + ds.id + "': " + e.what());
      }
    }
    for (const auto& [id, text] : store.datasources()) {
      if (registry.contains(id)) continue;
      try {
        registry.register_source(
            serialization::datasource_config_from_json(json::parse(text)));
      } catch (const std::exception& e) {
        std::cerr << "mirror: skipping stored data source " << id << ": " << e.what() << "\n";
      }
    }
    for (const auto& [key, text] : store.templates()) {
      try {
        auto tmpl = serialization::template_from_json(json::parse(text));
        overrides[key.first][tmpl.kind] = std::move(tmpl);
      } catch (const std::exception& e) {
        std::cerr << "mirror: skipping stored template " << key.first << "/" << key.second
                  << ": " << e.what() << "\n";
      }
    }
    for (const auto& [id, text] : store.sessions()) {
      try {
        const json record = json::parse(text);
        auto entry = std::make_shared<SessionEntry>();
        entry->session = serialization::session_from_json(record);
        entry->schema_fingerprint = record.at("schema_fingerprint").get<std::string>();
        const json& ids = record.at("template_ids");
        entry->template_ids = {ids.at("generation").get<std::string>(),
                               ids.at("summarization").get<std::string>(),
                               ids.at("visualization").get<std::string>()};
        entry->snapshot = text;
        sessions.emplace(id, entry);
        if (!terminal(entry->session.status)) {
          // The worker died with the previous process.
          QuerySession session = entry->session;
          if (session.table) {
            session.status = SessionStatus::kComplete;
            session.notice = kRestartNotice;
          } else {
            session.status = SessionStatus::kSqlFailed;
            session.error = kRestartNotice;
          }
          session.updated_at = pipeline::utc_timestamp_now();
          publish(entry, session);
        }
      } catch (const std::exception& e) {
        std::cerr << "mirror: skipping stored session " << id << ": " << e.what() << "\n";
      }
    }
  }

  // ---- routes ---------------------------------------------------------------

  void install_routes() {
    // The library default also sets SO_REUSEPORT, which would let a second
    // server share a port that is already in use.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    http.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!config.cors_origin.empty()) {
        res.set_header("Access-Control-Allow-Origin", config.cors_origin);
        res.set_header("Vary", "Origin");
      }
      if (req.method == "OPTIONS") {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
        res.status = 204;
        return httplib::Server::HandlerResponse::Handled;
      }
      if (!config.auth_token.empty() &&
          req.get_header_value("Authorization") != "Bearer " + config.auth_token) {
        reply_error(res, 401, "unauthorized", "missing or wrong bearer token");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    http.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string message = "unknown error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            message = e.what();
          } catch (...) {
          }
          reply_error(res, 500, "internal", message);
        });

    http.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, json{{"status", "ok"}}.dump());
    });
    http.Get("/api/datasources", [this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& handle : registry.list()) list.push_back(serialization::to_json(handle->config()));
      reply(res, 200, list.dump());
    });
    http.Post("/api/datasources",
              [this](const httplib::Request& req, httplib::Response& res) {
                register_datasource(req, res);
              });
    http.Get(R"(/api/datasources/([^/]+)/schema)",
             [this](const httplib::Request& req, httplib::Response& res) {
               const auto source = registry.find(req.matches[1].str());
               if (!source) return reply_error(res, 404, "unknown-datasource", "no such data source");
               reply(res, 200, serialization::to_json(source->introspect()).dump());
             });
    http.Post("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
      start_query(req, res);
    });
    http.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      std::lock_guard lock(sessions_mutex);
      for (const auto& [id, entry] : sessions) {
        std::lock_guard state(entry->state_mutex);
        list.push_back({{"id", id},
                        {"datasource_id", entry->session.datasource_id},
                        {"question", entry->session.question},
                        {"status", std::string(pipeline::to_string(entry->session.status))},
                        {"created_at", entry->session.created_at}});
      }
      reply(res, 200, list.dump());
    });
    http.Get(R"(/api/sessions/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               const auto entry = find_session(req.matches[1].str());
               if (!entry) return reply_error(res, 404, "unknown-session", "no such session");
               std::string snapshot;
               {
                 std::lock_guard lock(entry->state_mutex);
                 snapshot = entry->snapshot;
               }
               reply(res, 200, snapshot);
             });
    http.Post(R"(/api/sessions/([^/]+)/sql)",
              [this](const httplib::Request& req, httplib::Response& res) {
                rerun_sql(req.matches[1].str(), req, res);
              });
    http.Post(R"(/api/sessions/([^/]+)/edit)",
              [this](const httplib::Request& req, httplib::Response& res) {
                edit_sql(req.matches[1].str(), req, res);
              });
    http.Get("/api/autocomplete", [this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("datasource")) {
        return reply_error(res, 400, "bad-request", "datasource parameter is required");
      }
      const auto source = registry.find(req.get_param_value("datasource"));
      if (!source) return reply_error(res, 404, "unknown-datasource", "no such data source");
      json list = json::array();
      for (const auto& s : prompting::autocomplete(source->introspect(), req.get_param_value("q"))) {
        list.push_back(serialization::to_json(s));
      }
      reply(res, 200, list.dump());
    });
    http.Get("/api/templates", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string scope = req.get_param_value("datasource");
      if (!scope.empty() && !registry.contains(scope)) {
        return reply_error(res, 404, "unknown-datasource", "no such data source");
      }
      reply(res, 200, templates_document(scope).dump());
    });
    http.Put("/api/templates", [this](const httplib::Request& req, httplib::Response& res) {
      put_template(req, res);
    });
  }

  json templates_document(const std::string& scope) {
    const auto set = templates_for(scope);
    json list = json::array();
    for (auto kind : {TemplateKind::kGeneration, TemplateKind::kSummarization,
                      TemplateKind::kVisualization}) {
      list.push_back(serialization::to_json(set.get(kind)));
    }
    return {{"datasource_id", scope.empty() ? json(nullptr) : json(scope)},
            {"templates", std::move(list)}};
  }

  void register_datasource(const httplib::Request& req, httplib::Response& res) {
    datasource::DataSourceConfig ds;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) {
        return reply_error(res, 400, "bad-request", "multipart upload needs a 'file' part");
      }
      const auto file = req.get_file_value("file");
      const std::filesystem::path original(file.filename.empty() ? "upload.csv" : file.filename);
      std::string table = req.has_file("table") ? req.get_file_value("table").content : "";
      if (table.empty()) table = original.stem().string();
      ds.id = req.has_file("id") ? req.get_file_value("id").content : "";
      if (ds.id.empty()) ds.id = datasource::sanitize_table_name(table);
      if (registry.contains(ds.id)) {
        return reply_error(res, 400, "duplicate-id", "data source id already registered");
      }
      const auto dir = config.data_dir / "uploads" / datasource::sanitize_table_name(ds.id);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      const auto path = dir / (datasource::sanitize_table_name(table) + ".csv");
      {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(file.content.data(), static_cast<std::streamsize>(file.content.size()));
        if (!out) return reply_error(res, 500, "internal", "cannot store upload");
      }
      ds.kind = datasource::SourceKind::kCsv;
      ds.location = path.string();
      ds.row_limit = config.row_limit;
      ds.timeout = config.query_timeout;
    } else {
      const auto body = parse_body(req, res);
      if (!body) return;
      try {
        ds = with_defaults(serialization::datasource_config_from_json(*body), *body);
      } catch (const std::invalid_argument& e) {
        return reply_error(res, 400, "bad-request", e.what());
      }
      if (ds.id.empty()) return reply_error(res, 400, "bad-request", "id must not be empty");
    }
    try {
      registry.register_source(ds);
    } catch (const datasource::DataSourceError& e) {
      return reply_error(res, 400, datasource::to_string(e.kind()), e.what());
    }
    store.put_datasource(ds.id, serialization::to_json(ds).dump());
    reply(res, 201, json{{"id", ds.id}}.dump());
  }

  void start_query(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    const auto datasource_id = string_field(*body, "datasource_id");
    if (!datasource_id) return reply_error(res, 400, "bad-request", "datasource_id is required");
    const auto source = registry.find(*datasource_id);
    if (!source) return reply_error(res, 404, "unknown-datasource", "no such data source");
    const std::string question = string_field(*body, "question").value_or("");
    if (is_blank(question)) return reply_error(res, 422, "empty-question", "question is empty");

    auto templates = templates_for(*datasource_id);
    if (const auto wanted = string_field(*body, "template_id")) {
      const auto& fallback = prompting::default_template(TemplateKind::kGeneration);
      if (*wanted == fallback.id) {
        templates.generation = fallback;
      } else if (*wanted != templates.generation.id) {
        return reply_error(res, 422, "unknown-template", "no generation template '" + *wanted + "'");
      }
    }
    const bool debug = body->contains("debug") && body->at("debug").is_boolean() &&
                       body->at("debug").get<bool>();

    auto entry = std::make_shared<SessionEntry>();
    entry->busy = true;
    entry->schema_fingerprint = source->introspect().fingerprint;
    entry->template_ids = TemplateIds::of(templates);

    QuerySession seed;
    seed.id = pipeline::new_session_id();
    seed.datasource_id = *datasource_id;
    seed.question = question;
    seed.created_at = seed.updated_at = pipeline::utc_timestamp_now();
    {
      std::lock_guard lock(sessions_mutex);
      sessions.emplace(seed.id, entry);
    }
    publish(entry, seed);

    spawn([this, entry, source, templates, seed, opts = options(debug)] {
      // The terminal publish hands the session over; clearing the flag again
      // afterwards could release an edit that has claimed it since.
      bool released = false;
      auto publish_and_release = [&](const QuerySession& s) {
        publish(entry, s, /*release_when_terminal=*/true);
        released = released || terminal(s.status);
      };
      pipeline::Orchestrator orchestrator(*provider, opts, publish_and_release);
      try {
        orchestrator.run_query(*source, templates, seed.question, seed.id);
      } catch (const llm::ProviderError&) {
        // Already recorded on the session by the orchestrator.
      } catch (const std::exception& e) {
        if (released) return;
        QuerySession failed;
        {
          std::lock_guard lock(entry->state_mutex);
          failed = entry->session;
        }
        failed.status = failed.table ? SessionStatus::kComplete : SessionStatus::kSqlFailed;
        failed.error = e.what();
        failed.updated_at = pipeline::utc_timestamp_now();
        publish_and_release(failed);
      }
      if (!released) entry->busy = false;
    });

    std::string snapshot;
    {
      std::lock_guard lock(entry->state_mutex);
      snapshot = entry->snapshot;
    }
    reply(res, 202, snapshot);
  }

  // Common prelude of the two edit paths. Returns the entry and source with
  // the entry marked busy, or replies and returns nulls.
  std::pair<std::shared_ptr<SessionEntry>, datasource::DataSourceHandle> claim(
      const std::string& id, httplib::Response& res) {
    auto entry = find_session(id);
    if (!entry) {
      reply_error(res, 404, "unknown-session", "no such session");
      return {};
    }
    std::string datasource_id;
    {
      std::lock_guard lock(entry->state_mutex);
      datasource_id = entry->session.datasource_id;
    }
    auto source = registry.find(datasource_id);
    if (!source) {
      reply_error(res, 404, "unknown-datasource", "session data source is not registered");
      return {};
    }
    bool expected = false;
    if (!entry->busy.compare_exchange_strong(expected, true)) {
      reply_error(res, 409, "session-busy", "session is still running");
      return {};
    }
    return {entry, source};
  }

  QuerySession current(const std::shared_ptr<SessionEntry>& entry) {
    std::lock_guard lock(entry->state_mutex);
    return entry->session;
  }

  std::string snapshot_of(const std::shared_ptr<SessionEntry>& entry) {
    std::lock_guard lock(entry->state_mutex);
    return entry->snapshot;
  }

  void update_stage_two_ids(const std::shared_ptr<SessionEntry>& entry,
                            const pipeline::TemplateSet& templates) {
    std::lock_guard lock(entry->state_mutex);
    entry->template_ids.summarization = templates.summarization.id;
    entry->template_ids.visualization = templates.visualization.id;
  }

  void rerun_sql(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    const auto sql = string_field(*body, "sql");
    if (!sql) return reply_error(res, 400, "bad-request", "sql is required");
    auto [entry, source] = claim(id, res);
    if (!entry) return;
    BusyGuard guard(entry->busy);

    QuerySession session = current(entry);
    const auto templates = templates_for(session.datasource_id);
    pipeline::Orchestrator orchestrator(*provider, options(false),
                                        [this, e = entry](const QuerySession& s) { publish(e, s); });
    try {
      update_stage_two_ids(entry, templates);
      orchestrator.rerun_sql(session, *source, *sql, templates);
    } catch (const sqlguard::ValidationRejected& e) {
      return reply_error(res, 422, sqlguard::to_string(e.verdict().reason), e.verdict().detail);
    } catch (const datasource::ExecutionError& e) {
      return reply_error(res, 400, datasource::to_string(e.kind()), e.engine_message());
    }
    reply(res, 200, snapshot_of(entry));
  }

  void edit_sql(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    const std::string instruction = string_field(*body, "instruction").value_or("");
    if (is_blank(instruction)) {
      return reply_error(res, 422, "empty-instruction", "instruction is empty");
    }
    auto [entry, source] = claim(id, res);
    if (!entry) return;
    BusyGuard guard(entry->busy);

    QuerySession session = current(entry);
    if (!session.final_sql) return reply_error(res, 409, "no-sql", "session has no SQL to edit");
    const auto templates = templates_for(session.datasource_id);
    pipeline::Orchestrator orchestrator(*provider, options(false),
                                        [this, e = entry](const QuerySession& s) { publish(e, s); });
    try {
      update_stage_two_ids(entry, templates);
      orchestrator.edit_with_instruction(session, *source, instruction, templates);
    } catch (const llm::ProviderError& e) {
      return reply_error(res, 502, llm::to_string(e.kind()), e.what());
    }
    reply(res, 200, snapshot_of(entry));
  }

  void put_template(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    const std::string scope = string_field(*body, "datasource_id").value_or("");
    if (!scope.empty() && !registry.contains(scope)) {
      return reply_error(res, 404, "unknown-datasource", "no such data source");
    }
    json doc = body->contains("template") ? body->at("template") : *body;
    if (!doc.is_object()) return reply_error(res, 400, "bad-request", "template must be an object");
    if (!doc.contains("id") && doc.contains("kind") && doc.at("kind").is_string()) {
      doc["id"] = (scope.empty() ? std::string("custom") : scope) + "-" +
                  doc.at("kind").get<std::string>();
    }
    prompting::PromptTemplate tmpl;
    try {
      tmpl = serialization::template_from_json(doc);
      prompting::check_template(tmpl);
    } catch (const std::invalid_argument& e) {
      return reply_error(res, 400, "bad-request", e.what());
    } catch (const prompting::TemplateError& e) {
      return reply_error(res, 422, prompting::to_string(e.kind()), e.what());
    }
    {
      std::lock_guard lock(templates_mutex);
      overrides[scope][tmpl.kind] = tmpl;
    }
    store.put_template(scope, std::string(prompting::to_string(tmpl.kind)),
                       serialization::to_json(tmpl).dump());
    reply(res, 200, templates_document(scope).dump());
  }
};

ApiServer::ApiServer(ServerConfig config, std::unique_ptr<llm::Provider> provider)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(provider))) {
  impl_->restore();
  impl_->install_routes();
}

ApiServer::~ApiServer() {
  stop();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->workers_mutex);
    workers.swap(impl_->workers);
  }
  for (auto& worker : workers) {
    if (worker.joinable()) worker.join();
  }
}

int ApiServer::bind() {
  const auto& cfg = impl_->config;
  if (cfg.port == 0) {
    impl_->bound_port = impl_->http.bind_to_any_port(cfg.host);
  } else if (impl_->http.bind_to_port(cfg.host, cfg.port)) {
    impl_->bound_port = cfg.port;
  }
  if (impl_->bound_port < 0) {
    throw BindError("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
  }
  return impl_->bound_port;
}

void ApiServer::serve() { impl_->http.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace mirror::server

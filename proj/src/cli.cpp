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

#include "mirror/cli.hpp"

#include <pthread.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mirror/api_server.hpp"
#include "mirror/pipeline.hpp"
#include "mirror/prompting.hpp"
#include "mirror/serialization.hpp"
#include "mirror/server_config.hpp"
#include "mirror/sql_guard.hpp"

namespace mirror::cli {
namespace {

using datasource::Cell;
using datasource::DataSourceConfig;
using datasource::SourceKind;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string cell_text(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "NULL";
  if (const auto* s = std::get_if<std::string>(&cell)) {
    std::string text;
    for (char c : *s) {
      if (c == '\n') {
        text += "\\n";
      } else if (c == '\r') {
        text += "\\r";
      } else {
        text += c;
      }
    }
    return text;
  }
  return serialization::to_json(cell).dump();
}

bool ends_with_csv(const std::string& path) {
  if (path.size() < 4) return false;
  std::string tail = path.substr(path.size() - 4);
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == ".csv";
}

std::optional<server::ServerConfig> maybe_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return server::load_server_config(path);
}

// A configured source id, else a path to an embedded database or CSV file.
datasource::DataSourceHandle open_source(const std::string& ds,
                                         const std::optional<server::ServerConfig>& config) {
  if (config) {
    for (const auto& entry : config->datasources) {
      if (entry.id == ds) return datasource::DataSource::open(entry);
    }
  }
  const std::filesystem::path path(ds);
  if (!std::filesystem::is_regular_file(path)) {
    throw datasource::DataSourceError(datasource::DataSourceErrorKind::kUnreachable,
                                      "no data source or file named '" + ds + "'");
  }
  DataSourceConfig source;
  source.id = path.stem().string();
  source.kind = ends_with_csv(ds) ? SourceKind::kCsv : SourceKind::kEmbeddedFile;
  source.location = ds;
  if (config) {
    source.row_limit = config->row_limit;
    source.timeout = config->query_timeout;
  }
  return datasource::DataSource::open(source);
}

std::string read_all(std::istream& in) {
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void describe_attempt(std::ostream& err, const pipeline::GenerationAttempt& attempt) {
  err << "  attempt " << attempt.index << " (temperature " << attempt.params_used.temperature
      << "): ";
  if (attempt.provider_error) {
    err << "provider " << llm::to_string(attempt.provider_error->kind) << ": "
        << attempt.provider_error->message;
  } else if (attempt.extraction_error) {
    err << "no SQL in output: " << *attempt.extraction_error;
  } else if (!attempt.verdict.accepted) {
    err << "rejected " << sqlguard::to_string(attempt.verdict.reason) << ": "
        << attempt.verdict.detail;
  } else if (attempt.execution_error) {
    err << "execution " << datasource::to_string(attempt.execution_error->kind) << ": "
        << attempt.execution_error->message;
  } else {
    err << "ok";
  }
  err << "\n";
  if (!attempt.raw_output.empty()) err << "    output: " << attempt.raw_output << "\n";
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
  std::string config;
  std::optional<std::string> host;
  std::optional<int> port;
};

int serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  auto config = server::load_server_config(args.config);
  if (args.host) config.host = *args.host;
  if (args.port) config.port = *args.port;

  // Signals go to a waiter thread so stop() runs outside a signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server::ApiServer api(config, server::make_provider(config.provider));
  int port = 0;
  try {
    port = api.bind();
  } catch (const server::BindError& e) {
    err << "mirror: " << e.what() << "\n";
    return kExitFailure;
  }
  out << "mirror: listening on http://" << config.host << ":" << port << std::endl;

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    int signal = 0;
    sigwait(&signals, &signal);
    if (!done.load()) api.stop();
  });
  api.serve();
  done = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return kExitOk;
}

// ---- query ----------------------------------------------------------------

struct QueryArgs {
  std::string ds;
  std::string question;
  std::string provider;
  std::string config;
  std::string chart_out = "mirror-chart.json";
  std::string session_out;
  std::vector<std::string> templates;
  std::optional<std::size_t> max_retries;
  bool debug = false;
};

int query(const QueryArgs& args, std::ostream& out, std::ostream& err) {
  const auto config = maybe_config(args.config);
  server::ProviderSettings settings = config ? config->provider : server::ProviderSettings{};
  if (!args.provider.empty()) {
    settings = server::parse_provider_flag(args.provider, settings);
  } else if (!config) {
    throw UsageError("--provider or --config is required");
  }
  pipeline::PipelineOptions options = config ? config->pipeline : pipeline::PipelineOptions{};
  if (args.max_retries) options.max_retries = *args.max_retries;
  options.debug = options.debug || args.debug;

  auto templates = pipeline::TemplateSet::defaults();
  for (const auto& path : args.templates) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read template " + path);
    auto tmpl = prompting::parse_template_file(read_all(in));
    prompting::check_template(tmpl);
    templates.get(tmpl.kind) = std::move(tmpl);
  }

  const auto source = open_source(args.ds, config);
  const auto provider = server::make_provider(settings);
  pipeline::Orchestrator orchestrator(*provider, options);
  const auto session = orchestrator.run_query(*source, templates, args.question);

  if (!args.session_out.empty()) {
    std::ofstream file(args.session_out, std::ios::binary | std::ios::trunc);
    file << serialization::to_json(session).dump(2) << "\n";
  }

  if (session.status == pipeline::SessionStatus::kSqlFailed) {
    err << "mirror: no executable SQL after " << session.attempts.size() << " attempts\n";
    for (const auto& attempt : session.attempts) describe_attempt(err, attempt);
    return kExitExhausted;
  }

  const auto& table = *session.table;
  out << "SQL:\n" << *session.final_sql << "\n\n";
  out << "Result (" << table.rows.size() << (table.rows.size() == 1 ? " row" : " rows")
      << (table.truncated ? ", truncated" : "") << "):\n";
  out << render_table(table) << "\n";
  out << "Summary:\n";
  if (session.summary) {
    out << *session.summary << "\n";
  } else if (session.summary_error) {
    out << "(unavailable: " << session.summary_error->message << ")\n";
  }
  out << "\n";
  if (session.chart) {
    std::ofstream file(args.chart_out, std::ios::binary | std::ios::trunc);
    file << chart::emit(*session.chart) << "\n";
    if (!file) {
      err << "mirror: cannot write " << args.chart_out << "\n";
      return kExitFailure;
    }
    out << "Chart: " << args.chart_out << "\n";
  } else {
    out << "Chart: none";
    if (!session.chart_attempts.empty()) out << " (" << session.chart_attempts.back().message << ")";
    if (session.notice) out << " (" << *session.notice << ")";
    out << "\n";
  }
  return kExitOk;
}

// ---- introspect / validate-sql --------------------------------------------

int introspect(const std::string& ds, const std::string& config_path, std::ostream& out) {
  const auto config = maybe_config(config_path);
  const auto source = open_source(ds, config);
  const std::string schema = prompting::serialize_schema(source->introspect());
  if (!schema.empty()) out << schema << "\n";
  return kExitOk;
}

struct ValidateArgs {
  bool from_stdin = false;
  std::string file;
  std::string sql;
};

int validate_sql(const ValidateArgs& args, std::ostream& out) {
  std::string sql;
  const int sources = int(args.from_stdin) + int(!args.file.empty()) + int(!args.sql.empty());
  if (sources != 1) throw UsageError("give exactly one of --stdin, --sql or a file");
  if (args.from_stdin) {
    sql = read_all(std::cin);
  } else if (!args.file.empty()) {
    std::ifstream in(args.file, std::ios::binary);
    if (!in) throw UsageError("cannot read " + args.file);
    sql = read_all(in);
  } else {
    sql = args.sql;
  }
  const auto verdict = sqlguard::validate(sql);
  out << sqlguard::to_string(verdict.reason);
  if (!verdict.detail.empty()) out << ": " << verdict.detail;
  out << "\n";
  return verdict.accepted ? kExitOk : kExitFailure;
}

}  // namespace

std::string render_table(const datasource::ResultTable& table) {
  const std::size_t width = table.columns.size();
  std::vector<std::size_t> widths(width, 0);
  std::vector<std::vector<std::string>> cells;
  cells.reserve(table.rows.size());
  for (std::size_t c = 0; c < width; ++c) widths[c] = table.columns[c].name.size();
  for (const auto& row : table.rows) {
    std::vector<std::string> texts;
    for (std::size_t c = 0; c < width && c < row.size(); ++c) {
      texts.push_back(cell_text(row[c]));
      widths[c] = std::max(widths[c], texts.back().size());
    }
    cells.push_back(std::move(texts));
  }
  auto numeric = [&](std::size_t c) {
    const auto tag = table.columns[c].type;
    return tag == datasource::TypeTag::kInteger || tag == datasource::TypeTag::kReal;
  };
  auto pad = [](const std::string& text, std::size_t w, bool right) {
    const std::string fill(w - std::min(w, text.size()), ' ');
    return right ? fill + text : text + fill;
  };
  auto emit_line = [](std::ostringstream& os, const std::vector<std::string>& parts) {
    std::string line;
    for (std::size_t i = 0; i < parts.size(); ++i) line += (i ? "  " : "") + parts[i];
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  };

  std::ostringstream os;
  std::vector<std::string> parts;
  for (std::size_t c = 0; c < width; ++c) {
    parts.push_back(pad(table.columns[c].name, widths[c], numeric(c)));
  }
  emit_line(os, parts);
  parts.clear();
  for (std::size_t c = 0; c < width; ++c) parts.push_back(std::string(widths[c], '-'));
  emit_line(os, parts);
  for (const auto& row : cells) {
    parts.clear();
    for (std::size_t c = 0; c < row.size(); ++c) parts.push_back(pad(row[c], widths[c], numeric(c)));
    emit_line(os, parts);
  }
  return os.str();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural-language questions to SQL, summaries and charts", "mirror"};
  app.require_subcommand(1);

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API server");
  serve_cmd->add_option("--config", serve_args.config, "Server config file")->required();
  serve_cmd->add_option("--host", serve_args.host, "Override listen host");
  serve_cmd->add_option("--port", serve_args.port, "Override listen port (0 = any)");

  QueryArgs query_args;
  auto* query_cmd = app.add_subcommand("query", "Run the full pipeline once");
  query_cmd->add_option("--ds", query_args.ds, "Data source id or database/CSV path")->required();
  query_cmd->add_option("--question", query_args.question, "Question in natural language")
      ->required();
  query_cmd->add_option("--provider", query_args.provider, "scripted:<transcript> or http");
  query_cmd->add_option("--config", query_args.config, "Config file for provider and limits");
  query_cmd->add_option("--chart-out", query_args.chart_out, "Where to write the chart")
      ->capture_default_str();
  query_cmd->add_option("--session-out", query_args.session_out, "Write the session record");
  query_cmd->add_option("--template", query_args.templates, "Template file overriding a default");
  query_cmd->add_option("--max-retries", query_args.max_retries, "Generation attempts")
      ->check(CLI::PositiveNumber);
  query_cmd->add_flag("--debug", query_args.debug, "Keep rendered prompts in the session");

  std::string introspect_ds;
  std::string introspect_config;
  auto* introspect_cmd = app.add_subcommand("introspect", "Print the serialized schema");
  introspect_cmd->add_option("--ds", introspect_ds, "Data source id or database/CSV path")
      ->required();
  introspect_cmd->add_option("--config", introspect_config, "Config file with data sources");

  ValidateArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate-sql", "Check SQL against the read-only guard");
  validate_cmd->add_flag("--stdin", validate_args.from_stdin, "Read SQL from standard input");
  validate_cmd->add_option("--sql", validate_args.sql, "SQL text");
  validate_cmd->add_option("file", validate_args.file, "File holding the SQL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*serve_cmd) return serve(serve_args, out, err);
    if (*query_cmd) return query(query_args, out, err);
    if (*introspect_cmd) return introspect(introspect_ds, introspect_config, out);
    if (*validate_cmd) return validate_sql(validate_args, out);
  } catch (const UsageError& e) {
    err << "mirror: " << e.what() << "\n";
    return kExitUsage;
  } catch (const server::ConfigError& e) {
    err << "mirror: " << e.what() << "\n";
    return kExitUsage;
  } catch (const datasource::DataSourceError& e) {
    err << "mirror: data source " << datasource::to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const prompting::TemplateError& e) {
    err << "mirror: template " << prompting::to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const llm::ProviderError& e) {
    err << "mirror: provider " << llm::to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "mirror: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mirror::cli

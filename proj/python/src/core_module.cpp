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

// Python bindings. Records cross the boundary as JSON text; the pymirror
// package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>

#include "mirror/chartspec.hpp"
#include "mirror/datasource.hpp"
#include "mirror/llm_provider.hpp"
#include "mirror/pipeline.hpp"
#include "mirror/prompting.hpp"
#include "mirror/serialization.hpp"
#include "mirror/sql_guard.hpp"

namespace py = pybind11;
using namespace mirror;
using nlohmann::json;

namespace {

datasource::DataSourceHandle open_source(const std::string& location, const std::string& kind,
                                         const std::string& id, std::size_t row_limit, long long timeout_ms) {
  datasource::DataSourceConfig config;
  config.id = id;
  config.location = location;
  config.row_limit = row_limit;
  config.timeout = std::chrono::milliseconds(timeout_ms);
  if (kind.empty()) {
    const bool csv = location.size() >= 4 && location.compare(location.size() - 4, 4, ".csv") == 0;
    config.kind = csv ? datasource::SourceKind::kCsv : datasource::SourceKind::kEmbeddedFile;
  } else {
    const auto parsed = datasource::source_kind_from_string(kind);
    if (!parsed) throw py::value_error("unknown data source kind: " + kind);
    config.kind = *parsed;
  }
  py::gil_scoped_release release;
  return datasource::DataSource::open(config);
}

std::string execute(const datasource::DataSource& source, const std::string& sql) {
  auto validated = sqlguard::ValidatedSql::accept(sql);
  py::gil_scoped_release release;
  return serialization::to_json(source.execute(validated)).dump();
}

std::string prompt_json(const prompting::RenderedPrompt& prompt) {
  return json{{"text", prompt.text},
              {"token_estimate", prompt.token_estimate},
              {"template_id", prompt.template_id},
              {"inputs_fingerprint", prompt.inputs_fingerprint}}
      .dump();
}

prompting::PromptTemplate template_or_default(prompting::TemplateKind kind, const std::string& template_text) {
  if (template_text.empty()) return prompting::default_template(kind);
  auto tmpl = prompting::parse_template_file(template_text);
  if (tmpl.kind != kind) throw py::value_error("template kind does not match the prompt being rendered");
  return tmpl;
}

std::string run_query(const datasource::DataSource& source, const std::string& question,
                      const std::string& transcript_json, std::size_t max_retries, bool debug) {
  auto provider = llm::ScriptedProvider::from_json_text(transcript_json);
  pipeline::PipelineOptions options;
  options.max_retries = max_retries;
  options.debug = debug;
  pipeline::QuerySession last;
  pipeline::Orchestrator orchestrator(*provider, options, [&](const pipeline::QuerySession& s) { last = s; });
  py::gil_scoped_release release;
  try {
    last = orchestrator.run_query(source, pipeline::TemplateSet::defaults(), question);
  } catch (const llm::ProviderError&) {
    // The failure is recorded on the published session.
  }
  return serialization::to_json(last).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mirror natural-language-to-SQL core";

  py::exception<sqlguard::ValidationRejected>(m, "GuardRejected", PyExc_ValueError);
  py::exception<datasource::ExecutionError>(m, "ExecutionFailed", PyExc_RuntimeError);
  py::exception<datasource::DataSourceError>(m, "DataSourceFailed", PyExc_RuntimeError);
  py::exception<chart::VegaInvalid>(m, "ChartInvalid", PyExc_ValueError);
  py::exception<prompting::TemplateError>(m, "TemplateInvalid", PyExc_ValueError);
  // Each carries (kind, message) as its args.
  py::register_exception_translator([](std::exception_ptr p) {
    auto raise = [](const char* type, std::string_view kind, const std::string& message) {
      const auto cls = py::module_::import("pymirror._core").attr(type);
      PyErr_SetObject(cls.ptr(), py::make_tuple(std::string(kind), message).ptr());
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const sqlguard::ValidationRejected& e) {
      raise("GuardRejected", sqlguard::to_string(e.verdict().reason), e.verdict().detail);
    } catch (const datasource::ExecutionError& e) {
      raise("ExecutionFailed", datasource::to_string(e.kind()), e.engine_message());
    } catch (const datasource::DataSourceError& e) {
      raise("DataSourceFailed", datasource::to_string(e.kind()), e.what());
    } catch (const chart::VegaInvalid& e) {
      raise("ChartInvalid", chart::to_string(e.kind()), e.what());
    } catch (const prompting::TemplateError& e) {
      raise("TemplateInvalid", prompting::to_string(e.kind()), e.what());
    }
  });

  m.def("validate_sql", [](const std::string& sql) { return serialization::to_json(sqlguard::validate(sql)).dump(); },
        py::arg("sql"), "Guard verdict for `sql` as JSON text.");

  py::class_<datasource::DataSource, datasource::DataSourceHandle>(m, "DataSource")
      .def_static("open", &open_source, py::arg("location"), py::arg("kind") = "", py::arg("id") = "default",
                  py::arg("row_limit") = datasource::kDefaultRowLimit,
                  py::arg("timeout_ms") = datasource::kDefaultQueryTimeout.count())
      .def_property_readonly("id", [](const datasource::DataSource& s) { return s.config().id; })
      .def_property_readonly("database_path",
                             [](const datasource::DataSource& s) { return s.database_path().string(); })
      .def("introspect", [](const datasource::DataSource& s) { return serialization::to_json(s.introspect()).dump(); })
      .def("execute", &execute, py::arg("sql"));

  m.def(
      "render_generation_prompt",
      [](const std::string& schema_json, const std::string& question, const std::string& template_text) {
        const auto meta = serialization::schema_from_json(json::parse(schema_json));
        return prompt_json(prompting::render_generation_prompt(
            template_or_default(prompting::TemplateKind::kGeneration, template_text), meta, question));
      },
      py::arg("schema_json"), py::arg("question"), py::arg("template_text") = "");
  m.def(
      "render_summarization_prompt",
      [](const std::string& question, const std::string& table_json, const std::string& template_text) {
        const auto table = serialization::table_from_json(json::parse(table_json));
        return prompt_json(prompting::render_summarization_prompt(
            template_or_default(prompting::TemplateKind::kSummarization, template_text), question, table));
      },
      py::arg("question"), py::arg("table_json"), py::arg("template_text") = "");
  m.def(
      "render_visualization_prompt",
      [](const std::string& question, const std::string& table_json, const std::string& template_text) -> py::object {
        const auto table = serialization::table_from_json(json::parse(table_json));
        const auto rendered = prompting::render_visualization_prompt(
            template_or_default(prompting::TemplateKind::kVisualization, template_text), question, table);
        if (const auto* prompt = std::get_if<prompting::RenderedPrompt>(&rendered)) {
          return py::str(prompt_json(*prompt));
        }
        return py::none();
      },
      py::arg("question"), py::arg("table_json"), py::arg("template_text") = "");

  m.def(
      "validate_chart",
      [](const std::string& raw, const std::string& table_json) {
        const auto table = serialization::table_from_json(json::parse(table_json));
        return chart::emit(chart::parse_and_validate(raw, table));
      },
      py::arg("raw"), py::arg("table_json"), "Emitted Vega-Lite document for a valid chart.");

  m.def("run_query", &run_query, py::arg("source"), py::arg("question"), py::arg("transcript_json"),
        py::arg("max_retries") = 3, py::arg("debug") = false,
        "Runs the full pipeline against a scripted provider and returns the session as JSON text.");
}

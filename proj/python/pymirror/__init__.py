# Copyright 2026 The Mirror Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Natural-language questions over SQL data: guard, data sources, prompts, charts and the query pipeline."""

from __future__ import annotations

import json
import os
from typing import Any, Optional, Union

from . import _core
from ._core import ChartInvalid, DataSourceFailed, ExecutionFailed, GuardRejected, TemplateInvalid

__all__ = [
    "ChartInvalid",
    "DataSource",
    "DataSourceFailed",
    "ExecutionFailed",
    "GuardRejected",
    "TemplateInvalid",
    "render_generation_prompt",
    "render_summarization_prompt",
    "render_visualization_prompt",
    "run_query",
    "validate_chart",
    "validate_sql",
]

PathLike = Union[str, os.PathLike]


def validate_sql(sql: str) -> dict[str, Any]:
    """Guard verdict: accepted, reason, detail and referenced_tables."""
    return json.loads(_core.validate_sql(sql))


class DataSource:
    """A read-only SQLite file or an ingested CSV file."""

    def __init__(self, location: PathLike, *, kind: str = "", id: str = "default",
                 row_limit: int = 1000, timeout_ms: int = 30_000) -> None:
        self._source = _core.DataSource.open(os.fspath(location), kind, id, row_limit, timeout_ms)

    @property
    def id(self) -> str:
        return self._source.id

    @property
    def database_path(self) -> str:
        return self._source.database_path

    def introspect(self) -> dict[str, Any]:
        return json.loads(self._source.introspect())

    def execute(self, sql: str) -> dict[str, Any]:
        """Validates and runs `sql`; raises GuardRejected or ExecutionFailed."""
        return json.loads(self._source.execute(sql))


def render_generation_prompt(schema: dict[str, Any], question: str, template_text: str = "") -> dict[str, Any]:
    return json.loads(_core.render_generation_prompt(json.dumps(schema), question, template_text))


def render_summarization_prompt(question: str, table: dict[str, Any], template_text: str = "") -> dict[str, Any]:
    return json.loads(_core.render_summarization_prompt(question, json.dumps(table), template_text))


def render_visualization_prompt(question: str, table: dict[str, Any],
                                template_text: str = "") -> Optional[dict[str, Any]]:
    """None when the table has nothing to chart."""
    rendered = _core.render_visualization_prompt(question, json.dumps(table), template_text)
    return None if rendered is None else json.loads(rendered)


def validate_chart(raw: str, table: dict[str, Any]) -> dict[str, Any]:
    """Vega-Lite document bound to `table`; raises ChartInvalid."""
    return json.loads(_core.validate_chart(raw, json.dumps(table)))


def run_query(source: DataSource, question: str, transcript: Union[PathLike, list, dict], *,
              max_retries: int = 3, debug: bool = False) -> dict[str, Any]:
    """Runs the pipeline with a scripted provider.

    `transcript` is a transcript file path or the decoded transcript itself.
    """
    if isinstance(transcript, (list, dict)):
        text = json.dumps(transcript)
    else:
        with open(transcript, encoding="utf-8") as handle:
            text = handle.read()
    return json.loads(_core.run_query(source._source, question, text, max_retries, debug))

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

import json
import subprocess

import jsonschema
import pytest

import pymirror


def validator(root_schema, name):
    schema = dict(root_schema)
    schema["$ref"] = f"#/$defs/{name}"
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def test_schema_document_is_valid(root_schema):
    jsonschema.Draft202012Validator.check_schema(root_schema)


def test_verdicts(root_schema):
    check = validator(root_schema, "verdict")
    for sql in ["SELECT 1", "DROP TABLE t", "SELECT 1; SELECT 2", "", "SELECT load_extension('x')"]:
        check.validate(pymirror.validate_sql(sql))


def test_schema_and_table(root_schema, sports_db):
    source = pymirror.DataSource(sports_db)
    validator(root_schema, "schemaMetadata").validate(source.introspect())
    table = source.execute("SELECT name, age, points, x'beef' AS raw FROM players")
    validator(root_schema, "resultTable").validate(table)


def test_sessions(root_schema, sports_db, fixtures):
    check = validator(root_schema, "session")
    source = pymirror.DataSource(sports_db, id="sports")
    happy = pymirror.run_query(source, "q", fixtures / "transcripts" / "sports_happy.json", debug=True)
    check.validate(happy)
    validator(root_schema, "chart").validate(happy["chart"])
    failed = pymirror.run_query(source, "q", fixtures / "transcripts" / "always_drop.json")
    check.validate(failed)
    auth = pymirror.run_query(source, "q", [{"match": "*", "response": "", "error": "auth"}])
    check.validate(auth)
    assert auth["attempts"][0]["provider_error"]["kind"] == "auth"


def test_schema_rejects_drift(root_schema, sports_db, fixtures):
    check = validator(root_schema, "session")
    source = pymirror.DataSource(sports_db)
    session = pymirror.run_query(source, "q", fixtures / "transcripts" / "sports_happy.json")
    session["status"] = "done"
    with pytest.raises(jsonschema.ValidationError):
        check.validate(session)


def test_cli_session_file(root_schema, sports_db, fixtures, mirror_binary, tmp_path):
    out = tmp_path / "session.json"
    result = subprocess.run(
        [mirror_binary, "query", "--ds", str(sports_db), "--question", "Which team?",
         "--provider", f"scripted:{fixtures / 'transcripts' / 'sports_happy.json'}",
         "--chart-out", str(tmp_path / "chart.json"), "--session-out", str(out)],
        capture_output=True, text=True, timeout=30)
    assert result.returncode == 0, result.stderr
    validator(root_schema, "session").validate(json.loads(out.read_text()))
    validator(root_schema, "chart").validate(json.loads((tmp_path / "chart.json").read_text()))

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
import os
import pathlib
import sqlite3

import pytest

REPO = pathlib.Path(__file__).resolve().parents[2]
FIXTURES = pathlib.Path(os.environ.get("MIRROR_FIXTURE_DIR", REPO / "tests" / "fixtures"))
SCHEMAS = pathlib.Path(os.environ.get("MIRROR_SCHEMA_DIR", REPO / "schemas"))


@pytest.fixture
def fixtures() -> pathlib.Path:
    return FIXTURES


@pytest.fixture
def sports_db(tmp_path: pathlib.Path) -> pathlib.Path:
    path = tmp_path / "sports.sqlite"
    with sqlite3.connect(path) as conn:
        conn.executescript((FIXTURES / "sports.sql").read_text())
    return path


@pytest.fixture(scope="session")
def root_schema() -> dict:
    return json.loads((SCHEMAS / "mirror.schema.json").read_text())


@pytest.fixture
def mirror_binary() -> str:
    binary = os.environ.get("MIRROR_BINARY")
    if not binary or not os.path.exists(binary):
        pytest.skip("MIRROR_BINARY not set")
    return binary

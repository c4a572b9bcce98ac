import json
from pathlib import Path

import pytest

from sforge.mapmodel import load_map
from sforge.scenario import load_scenario_dir

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = REPO_ROOT / "fixtures" / "mini-pacific"
CASSETTE = FIXTURE_DIR / "cassettes" / "run.jsonl"
DOCS_DIR = REPO_ROOT / "docs"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def cassette_path() -> Path:
    return CASSETTE


@pytest.fixture(scope="session")
def mini_pacific():
    return load_scenario_dir(FIXTURE_DIR)


@pytest.fixture(scope="session")
def mini_map():
    raw = json.loads((FIXTURE_DIR / "map.json").read_text(encoding="utf-8"))
    return load_map(raw)


@pytest.fixture(scope="session")
def mini_map_doc():
    return json.loads((FIXTURE_DIR / "map.json").read_text(encoding="utf-8"))

"""Shared fixtures: the synthetic corpus and its two window snapshots."""

import json
from pathlib import Path

import pytest

from src.fixture import fixture_config, write_fixture_corpus
from src.pipeline import SemanticMapper

GOLDEN_REPORTS = Path(__file__).parent / "data" / "golden_reports.json"


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    directory = tmp_path_factory.mktemp("fixture_corpus")
    write_fixture_corpus(directory)
    return directory


@pytest.fixture(scope="session")
def fixture_mapper(fixture_dir) -> SemanticMapper:
    return SemanticMapper(fixture_config(fixture_dir))


@pytest.fixture(scope="session")
def snapshot_a(fixture_mapper):
    return fixture_mapper.build_snapshot("A")


@pytest.fixture(scope="session")
def snapshot_b(fixture_mapper):
    return fixture_mapper.build_snapshot("B")


@pytest.fixture(scope="session")
def golden() -> dict:
    return json.loads(GOLDEN_REPORTS.read_text(encoding="utf-8"))

"""Tests for the synthetic fixture corpus."""

import datetime as dt
from collections import Counter

import numpy as np
import pytest

from src.corpus import ingest_directory
from src.fixture import (
    FIXTURE_MIN_OCCURRENCES,
    _surface,
    render_document,
    window_a_counts,
    window_b_counts,
    write_fixture_corpus,
)
from src.models import Document
from src.textprep import document_frequencies, load_stoplist, stem_plural


def _frequencies(text: str) -> dict[str, int]:
    return document_frequencies(Document(id="x", text=text), load_stoplist()).counts


class TestCounts:
    def test_document_numbers(self):
        assert len(window_a_counts()) == 16
        assert len(window_b_counts()) == 8

    def test_window_a_totals(self):
        total = sum(window_a_counts(), Counter())
        assert total["aspartame"] == 56
        assert total["saccharin"] == FIXTURE_MIN_OCCURRENCES
        assert total["headache"] == 12

    def test_diet_in_every_b_document(self):
        assert all(doc["diet"] == 3 for doc in window_b_counts())


class TestRenderDocument:
    def test_counts_survive_rendering(self):
        counts = Counter({"aspartame-infused": 3, "sweetener": 4, "diet": 2})
        text = render_document(counts, np.random.default_rng(1))
        freq = _frequencies(text)
        assert freq == dict(counts)

    def test_sentences_are_capitalized(self):
        text = render_document(Counter({"sugar": 20}), np.random.default_rng(2))
        sentences = [s.strip() for s in text.replace("\n", " ").split(".") if s.strip()]
        assert all(s[0].isupper() or s[0].isdigit() for s in sentences)


class TestWriteFixtureCorpus:
    def test_files_and_dates(self, tmp_path):
        files = write_fixture_corpus(tmp_path)
        names = [f.name for f in files]
        assert len(names) == 24
        assert names[0] == "1984-01-15_sweet01.txt"
        assert names[15] == f"{dt.date(1984, 1, 15) + dt.timedelta(days=65 * 15)}_sweet16.txt"
        assert names[16] == "2004-02-01_diet01.txt"

        corpus = ingest_directory(tmp_path)
        dates = [d.date for d in corpus.documents]
        assert min(dates) == dt.date(1984, 1, 15)
        assert max(dates) == dt.date(2004, 2, 1) + dt.timedelta(days=120 * 7)

    def test_same_seed_same_bytes(self, tmp_path):
        first = write_fixture_corpus(tmp_path / "one", seed=7)
        second = write_fixture_corpus(tmp_path / "two", seed=7)
        assert [f.read_bytes() for f in first] == [f.read_bytes() for f in second]

    def test_seed_changes_text_not_counts(self, tmp_path):
        first = write_fixture_corpus(tmp_path / "one", seed=7)
        second = write_fixture_corpus(tmp_path / "two", seed=8)
        assert first[0].read_bytes() != second[0].read_bytes()
        for a, b in zip(first, second):
            text_a, text_b = a.read_text(encoding="utf-8"), b.read_text(encoding="utf-8")
            assert _frequencies(text_a) == _frequencies(text_b)

    @pytest.mark.parametrize("seed", [0, 3, 7, 11])
    def test_ingested_counts_match_plan(self, tmp_path, seed):
        files = write_fixture_corpus(tmp_path, seed=seed)
        planned = window_a_counts() + window_b_counts()
        for path, counts in zip(files, planned):
            assert _frequencies(path.read_text(encoding="utf-8")) == dict(counts), path.name


class TestSurface:
    def test_plural_stems_back(self):
        rng = np.random.default_rng(0)
        for word in ("fitness", "diet", "gym", "aspartame-infused"):
            forms = {_surface(word, rng) for _ in range(50)}
            assert {stem_plural(f) for f in forms} == {word}

    def test_double_s_never_pluralized(self):
        rng = np.random.default_rng(0)
        assert {_surface("fitness", rng) for _ in range(50)} == {"fitness"}

"""Tests for the word/document, co-word and similarity matrices."""

import datetime as dt
import logging
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from src.errors import PipelineError
from src.models import FrequencyList, TimeWindow
from src.textprep import build_vocabulary, window_frequencies
from src.vectorspace import (
    WordDocMatrix,
    build_coword_matrix,
    build_word_doc_matrix,
    cosine_matrix,
    pearson_matrix,
)


def _matrix(rows) -> WordDocMatrix:
    cells = np.array(rows, dtype=np.int64)
    return WordDocMatrix(
        words=[f"w{i}" for i in range(cells.shape[0])],
        docs=[f"d{j}" for j in range(cells.shape[1])],
        cells=cells,
    )


@st.composite
def count_matrices(draw, max_words=10, max_docs=8):
    """Random counts 0-5 with every row non-zero."""
    n = draw(st.integers(1, max_words))
    d = draw(st.integers(1, max_docs))
    cells = draw(arrays(np.int64, (n, d), elements=st.integers(0, 5)))
    for i in range(n):
        if not cells[i].any():
            cells[i, draw(st.integers(0, d - 1))] = draw(st.integers(1, 5))
    return _matrix(cells)


def _cosine_oracle(x, y) -> float:
    dot = sum(a * b for a, b in zip(x, y))
    return dot / math.sqrt(sum(a * a for a in x) * sum(b * b for b in y))


def _window_inputs():
    per_doc = [
        FrequencyList(scope="d1", counts={"aspartame": 6, "diet": 1, "sugar": 3}),
        FrequencyList(scope="d2", counts={"aspartame": 5, "sugar": 2}),
        FrequencyList(scope="d3", counts={"diet": 9, "sugar": 1}),
    ]
    window = TimeWindow(
        label="A", start=dt.date(1984, 1, 1), end=dt.date(1986, 12, 31), document_ids=["d1", "d2", "d3"],
    )
    vocab = build_vocabulary(window_frequencies("A", per_doc), min_occurrences=5, per_doc=per_doc)
    return window, vocab, per_doc


class TestBuildWordDocMatrix:
    def test_rows_follow_vocab_columns_follow_window(self):
        window, vocab, per_doc = _window_inputs()
        m = build_word_doc_matrix(window, vocab, per_doc)
        assert m.words == ["aspartame", "diet", "sugar"]
        assert m.docs == ["d1", "d2", "d3"]
        assert m.shape == (3, 3)
        assert m.row("diet").tolist() == [1, 0, 9]
        assert m.row_sums() == {"aspartame": 11, "diet": 10, "sugar": 6}

    def test_binary(self):
        window, vocab, per_doc = _window_inputs()
        m = build_word_doc_matrix(window, vocab, per_doc, binary=True)
        assert m.row("aspartame").tolist() == [1, 1, 0]

    def test_frequency_lists_must_cover_window(self):
        window, vocab, per_doc = _window_inputs()
        with pytest.raises(PipelineError, match="do not cover"):
            build_word_doc_matrix(window, vocab, per_doc[:2])

    def test_row_sum_mismatch(self):
        window, vocab, per_doc = _window_inputs()
        per_doc[0] = FrequencyList(scope="d1", counts={"aspartame": 1, "diet": 1, "sugar": 3})
        with pytest.raises(PipelineError, match="internal consistency error"):
            build_word_doc_matrix(window, vocab, per_doc)

    def test_fixture_shape(self, snapshot_a, golden):
        assert [len(snapshot_a.counts), len(snapshot_a.counts[0])] == golden["A"]["matrix_shape"]
        sums = [sum(row) for row in snapshot_a.counts]
        assert sums == [e.window_frequency for e in snapshot_a.vocab.included]


class TestCowordMatrix:
    def test_small(self):
        coword = build_coword_matrix(_matrix([[1, 0, 2], [3, 1, 0], [0, 0, 4]]))
        assert coword.cells.tolist() == [[2, 1, 1], [1, 2, 0], [1, 0, 1]]
        assert coword.doc_frequency("w0") == 2

    @given(count_matrices())
    @settings(max_examples=300, deadline=None)
    def test_matches_document_intersection(self, m):
        coword = build_coword_matrix(m)
        docs = [set(np.flatnonzero(row)) for row in m.cells]
        for i in range(len(docs)):
            for j in range(len(docs)):
                assert coword.cells[i, j] == len(docs[i] & docs[j])

    @given(count_matrices())
    @settings(max_examples=300, deadline=None)
    def test_binary_cosine_identity(self, m):
        binary = m.binarized()
        cos = cosine_matrix(binary).cells
        coword = build_coword_matrix(binary).cells
        df = np.diag(coword).astype(np.float64)
        expected = coword / np.sqrt(np.outer(df, df))
        assert np.allclose(cos, expected, atol=1e-12, rtol=0)


class TestCosineMatrix:
    def test_identical_rows(self):
        assert cosine_matrix(_matrix([[2, 1], [2, 1]])).value("w0", "w1") == 1.0

    def test_orthogonal_rows(self):
        assert cosine_matrix(_matrix([[1, 0], [0, 1]])).value("w0", "w1") == 0.0

    def test_half(self):
        assert cosine_matrix(_matrix([[1, 1, 0], [0, 1, 1]])).value("w0", "w1") == pytest.approx(0.5, abs=1e-15)

    def test_zero_row(self):
        with pytest.raises(PipelineError, match="zero-norm"):
            cosine_matrix(_matrix([[1, 0], [0, 0]]))

    @given(count_matrices())
    @settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_matches_oracle(self, m):
        c = cosine_matrix(m)
        rows = m.cells.tolist()
        n = len(rows)
        assert np.all(c.cells >= 0.0) and np.all(c.cells <= 1.0)
        assert np.array_equal(c.cells, c.cells.T)
        for i in range(n):
            assert c.cells[i, i] == 1.0
            for j in range(i + 1, n):
                assert abs(c.cells[i, j] - _cosine_oracle(rows[i], rows[j])) <= 1e-12

    @given(count_matrices(), st.data())
    @settings(max_examples=200, deadline=None)
    def test_row_scaling_invariance(self, m, data):
        i = data.draw(st.integers(0, len(m.words) - 1))
        factor = data.draw(st.integers(2, 9))
        scaled = m.cells.copy()
        scaled[i] *= factor
        before = cosine_matrix(m).cells
        after = cosine_matrix(_matrix(scaled)).cells
        assert np.max(np.abs(before - after)) <= 1e-12

    @given(count_matrices(), st.randoms(use_true_random=False))
    @settings(max_examples=200, deadline=None)
    def test_column_permutation_invariance(self, m, rnd):
        order = list(range(m.cells.shape[1]))
        rnd.shuffle(order)
        permuted = _matrix(m.cells[:, order])
        assert np.max(np.abs(cosine_matrix(m).cells - cosine_matrix(permuted).cells)) <= 1e-12


class TestPearsonMatrix:
    def test_self_and_anticorrelation(self):
        p = pearson_matrix(_matrix([[1, 2, 3], [3, 2, 1]]))
        assert p.value("w0", "w0") == 1.0
        assert p.value("w0", "w1") == pytest.approx(-1.0, abs=1e-12)
        assert p.measure == "pearson"

    def test_constant_row_undefined(self, caplog):
        with caplog.at_level(logging.WARNING):
            p = pearson_matrix(_matrix([[1, 1, 1], [1, 2, 3], [2, 0, 5]]))
        assert p.undefined == ["w0"]
        assert math.isnan(p.value("w0", "w1"))
        assert math.isnan(p.value("w0", "w0"))
        assert not math.isnan(p.value("w1", "w2"))
        assert "undefined" in caplog.text

    @given(count_matrices())
    @settings(max_examples=200, deadline=None)
    def test_range_and_symmetry(self, m):
        cells = pearson_matrix(m).cells
        defined = cells[~np.isnan(cells)]
        assert np.all(defined >= -1.0) and np.all(defined <= 1.0)
        assert np.array_equal(np.isnan(cells), np.isnan(cells.T))

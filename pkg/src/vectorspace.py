"""
Vector Space Module
Builds the asymmetric word/document occurrence matrix, the symmetric co-word
matrix, and the cosine-normalized word similarity matrix. A Pearson matrix is
available for side-by-side comparison.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from src.errors import PipelineError
from src.models import FrequencyList, TimeWindow, Vocabulary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WordDocMatrix:
    """Term-by-document counts; cells[w, d] = occurrences of word w in doc d."""
    words: list[str]
    docs: list[str]
    cells: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.cells.shape[0]), int(self.cells.shape[1])

    def row(self, word: str) -> np.ndarray:
        return self.cells[self.words.index(word)]

    def row_sums(self) -> dict[str, int]:
        return {w: int(s) for w, s in zip(self.words, self.cells.sum(axis=1))}

    def binarized(self) -> "WordDocMatrix":
        """Presence/absence version of the matrix."""
        return replace(self, cells=(self.cells > 0).astype(np.int64))


@dataclass(frozen=True, eq=False)
class CoWordMatrix:
    """cells[w, v] = number of documents containing both w and v."""
    words: list[str]
    cells: np.ndarray

    def doc_frequency(self, word: str) -> int:
        i = self.words.index(word)
        return int(self.cells[i, i])


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric word-by-word similarity."""
    words: list[str]
    cells: np.ndarray
    measure: str = "cosine"
    threshold: Optional[float] = None
    undefined: list[str] = field(default_factory=list)

    def value(self, a: str, b: str) -> float:
        return float(self.cells[self.words.index(a), self.words.index(b)])

    def with_threshold(self, threshold: float) -> "SimilarityMatrix":
        return replace(self, threshold=threshold)


@dataclass(frozen=True, eq=False)
class CosineMatrix(SimilarityMatrix):
    measure: str = "cosine"


@dataclass(frozen=True, eq=False)
class PearsonMatrix(SimilarityMatrix):
    """Product-moment correlations; NaN marks rows with zero variance."""
    measure: str = "pearson"


def build_word_doc_matrix(
    window: TimeWindow,
    vocab: Vocabulary,
    per_doc_freqs: list[FrequencyList],
    binary: bool = False,
) -> WordDocMatrix:
    """
    Arrange raw per-document counts of the included vocabulary.

    Rows follow the vocabulary order, columns the window's document order.
    With binary=True the counts are reduced to presence/absence after the
    consistency checks.
    """
    words = vocab.included_stems()
    if not words:
        raise PipelineError("vectorspace", "vocabulary has no included words")

    by_scope = {f.scope: f for f in per_doc_freqs}
    if set(by_scope) != set(window.document_ids) or len(per_doc_freqs) != len(window.document_ids):
        raise PipelineError(
            "vectorspace",
            f"frequency lists do not cover exactly the documents of window '{window.label}'",
        )

    cells = np.zeros((len(words), len(window.document_ids)), dtype=np.int64)
    for j, doc_id in enumerate(window.document_ids):
        counts = by_scope[doc_id].counts
        for i, word in enumerate(words):
            cells[i, j] = counts.get(word, 0)

    matrix = WordDocMatrix(words=words, docs=list(window.document_ids), cells=cells)
    for word, total in matrix.row_sums().items():
        if total == 0:
            raise PipelineError(
                "vectorspace",
                f"internal consistency error: vocabulary word '{word}' never occurs in window '{window.label}'",
            )
        if total != vocab.frequency(word):
            raise PipelineError(
                "vectorspace",
                f"internal consistency error: row sum {total} for '{word}' != window frequency {vocab.frequency(word)}",
            )

    logger.info(f"Word/document matrix for '{window.label}': {matrix.shape[0]} x {matrix.shape[1]}")
    return matrix.binarized() if binary else matrix


def build_coword_matrix(m: WordDocMatrix) -> CoWordMatrix:
    """Document-level co-occurrence counts."""
    presence = (m.cells > 0).astype(np.int64)
    return CoWordMatrix(words=list(m.words), cells=presence @ presence.T)


def _symmetrize_upper(cells: np.ndarray) -> np.ndarray:
    upper = np.triu(cells, 1)
    return upper + upper.T + np.diag(np.diag(cells))


def cosine_matrix(m: WordDocMatrix) -> CosineMatrix:
    """
    Cosine between word rows:

        cos(x, y) = sum(x_i * y_i) / sqrt(sum(x_i^2) * sum(y_i^2))

    summed over the n documents of the window.
    """
    x = m.cells.astype(np.float64)
    squares = np.einsum("ij,ij->i", x, x)
    zero = [w for w, s in zip(m.words, squares) if s == 0]
    if zero:
        raise PipelineError("vectorspace", f"zero-norm rows (pipeline corruption): {zero[:5]}")

    dot = x @ x.T
    cells = dot / np.sqrt(np.outer(squares, squares))
    cells = np.clip(_symmetrize_upper(cells), 0.0, 1.0)
    np.fill_diagonal(cells, 1.0)
    return CosineMatrix(words=list(m.words), cells=cells)


def pearson_matrix(m: WordDocMatrix) -> PearsonMatrix:
    """Pearson correlation between word rows; zero-variance rows become NaN."""
    x = m.cells.astype(np.float64)
    centered = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    defined = norms > 0

    cells = np.full((len(m.words), len(m.words)), np.nan)
    idx = np.flatnonzero(defined)
    if idx.size:
        sub = centered[idx]
        corr = (sub @ sub.T) / np.outer(norms[idx], norms[idx])
        corr = np.clip(_symmetrize_upper(corr), -1.0, 1.0)
        np.fill_diagonal(corr, 1.0)
        cells[np.ix_(idx, idx)] = corr

    undefined = [w for w, ok in zip(m.words, defined) if not ok]
    if undefined:
        logger.warning(f"Pearson correlation undefined for zero-variance rows: {undefined}")
    return PearsonMatrix(words=list(m.words), cells=cells, undefined=undefined)

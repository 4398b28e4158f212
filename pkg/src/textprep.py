"""
Text Preprocessing Module
Lowercases and tokenizes documents, strips the plural "s", removes stopwords,
and turns per-document frequency lists into a window vocabulary.
"""

import logging
import os
import re
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd

from src.errors import PipelineError
from src.models import Document, FrequencyList, Token, VocabEntry, Vocabulary

logger = logging.getLogger(__name__)

DEFAULT_STOPWORD_FILE = Path(__file__).parent / "data" / "uspto_stopwords.txt"
STOPWORDS_ENV = "FRAMESCOPE_STOPWORDS"

# Runs of letters/digits joined by single internal hyphens.
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*")


def tokenize(text: str, plural_min_length: int = 4) -> list[Token]:
    """Split text into lowercase tokens; hyphenated compounds stay whole."""
    tokens = []
    for match in _TOKEN_RE.finditer(text.lower()):
        surface = match.group(0)
        if surface.replace("-", "").isdigit():
            continue
        tokens.append(Token(surface=surface, stem=stem_plural(surface, plural_min_length)))
    return tokens


def stem_plural(token: str, min_length: int = 4) -> str:
    """Remove one trailing "s" (not "ss") from tokens of at least `min_length` chars."""
    if len(token) >= min_length and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def load_stoplist(path: Optional[str | Path] = None) -> frozenset[str]:
    """
    Read a stopword file: one lowercase word per line, `#` starts a comment.

    Resolution order: explicit path, $FRAMESCOPE_STOPWORDS, bundled USPTO list.
    """
    source = Path(path or os.getenv(STOPWORDS_ENV) or DEFAULT_STOPWORD_FILE)
    try:
        lines = source.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise PipelineError("textprep", f"cannot read stopword file {source}: {e}", "check stopword_file") from e

    words = set()
    for line in lines:
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    logger.info(f"Loaded {len(words)} stopwords from {source}")
    return frozenset(words)


def remove_stopwords(tokens: list[Token], stoplist: Iterable[str]) -> list[Token]:
    """Drop tokens whose stem (or surface form) is a stopword; order preserved."""
    stops = set(stoplist)
    if not stops:
        logger.warning("Stoplist is empty; no stopwords will be removed")
    return [t for t in tokens if t.stem not in stops and t.surface not in stops]


def document_frequencies(
    doc: Document,
    stoplist: Iterable[str],
    plural_min_length: int = 4,
) -> FrequencyList:
    """tokenize -> stem -> stopword filter -> count, for one document."""
    tokens = remove_stopwords(tokenize(doc.text, plural_min_length), stoplist)
    return FrequencyList(scope=doc.id, counts=dict(Counter(t.stem for t in tokens)))


def window_frequencies(label: str, per_doc: list[FrequencyList]) -> FrequencyList:
    """Sum per-document counts into the window's frequency list."""
    total: Counter = Counter()
    for freq in per_doc:
        total.update(freq.counts)
    return FrequencyList(scope=label, counts=dict(sorted(total.items())))


def build_vocabulary(
    window_freq: FrequencyList,
    min_occurrences: int,
    cap: int = 100,
    per_doc: Optional[list[FrequencyList]] = None,
    strict: bool = True,
) -> Vocabulary:
    """
    Mark the stems that pass the frequency cutoff, keeping at most `cap`.

    Args:
        window_freq: Window-level stem counts.
        min_occurrences: Cutoff; included stems occur more than this many times
            (at least this many when strict=False).
        cap: Maximum number of included stems, by (frequency desc, stem asc).
        per_doc: Per-document lists used for document frequencies.

    Returns:
        Vocabulary with every stem of the window, included ones flagged.
    """
    if min_occurrences < 0:
        raise PipelineError("textprep", "min_occurrences must be >= 0")
    if cap < 1:
        raise PipelineError("textprep", "vocabulary cap must be >= 1")

    doc_freq: Counter = Counter()
    for freq in per_doc or []:
        doc_freq.update(freq.counts.keys())

    ranked = window_freq.most_common()
    entries = []
    included = 0
    for stem, count in ranked:
        passes = count > min_occurrences if strict else count >= min_occurrences
        keep = passes and included < cap
        included += keep
        entries.append(VocabEntry(
            stem=stem,
            window_frequency=count,
            doc_frequency=doc_freq.get(stem, 0),
            included=keep,
        ))

    if included == 0:
        raise PipelineError(
            "textprep",
            "vocabulary empty; lower min_occurrences",
            f"no stem in '{window_freq.scope}' occurs more than {min_occurrences} times",
        )
    logger.info(f"Vocabulary for '{window_freq.scope}': {included} included, {len(entries) - included} excluded")
    return Vocabulary(entries=entries, min_occurrences=min_occurrences, cap=cap, strict=strict)


def focal_candidates(freq_lists: list[FrequencyList], top_n: int = 20) -> list[tuple[str, int, int]]:
    """
    Compare the top of several frequency lists to pick common focus words.

    Returns:
        (stem, number of lists whose top_n contain it, total count) tuples,
        ranked by list coverage, then total count, then stem.
    """
    coverage: Counter = Counter()
    totals: Counter = Counter()
    for freq in freq_lists:
        for stem, count in freq.most_common(top_n):
            coverage[stem] += 1
            totals[stem] += count
    ranked = sorted(coverage, key=lambda s: (-coverage[s], -totals[s], s))
    return [(stem, coverage[stem], totals[stem]) for stem in ranked]


def write_frequency_csv(freq: FrequencyList, path: str | Path) -> Path:
    """Export a frequency list as `stem,count`, most frequent first."""
    out = Path(path)
    frame = pd.DataFrame(freq.most_common(), columns=["stem", "count"])
    frame.to_csv(out, index=False, lineterminator="\n")
    return out

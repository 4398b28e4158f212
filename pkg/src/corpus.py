"""
Corpus Module
Reads a directory of plain-text documents (one article per file), attaches
dates from the filename or a sidecar metadata.csv, and partitions the
documents into labeled time windows.
"""

import datetime as dt
import logging
import re
from collections import Counter
from pathlib import Path
from typing import Optional

import pandas as pd
from pydantic import BaseModel

from src.errors import PipelineError
from src.models import Corpus, Document, IngestReport, SkippedFile, TimeWindow

logger = logging.getLogger(__name__)

REPLACEMENT_CHAR = "�"


class DateRule(BaseModel):
    """How to find a document's date: filename prefix, then sidecar file."""
    pattern: str = r"^(\d{4}-\d{2}-\d{2})"
    fmt: str = "%Y-%m-%d"
    metadata_file: Optional[str] = "metadata.csv"

    def parse_filename(self, name: str) -> Optional[dt.date]:
        match = re.search(self.pattern, name)
        if not match:
            return None
        raw = match.group(1) if match.groups() else match.group(0)
        try:
            return dt.datetime.strptime(raw, self.fmt).date()
        except ValueError:
            logger.warning(f"Filename '{name}' matched the date pattern but '{raw}' is not a valid date")
            return None


def _read_sidecar(directory: Path, rule: DateRule) -> dict[str, dt.date]:
    """Read `id,date` rows from the optional sidecar file."""
    if not rule.metadata_file:
        return {}
    path = directory / rule.metadata_file
    if not path.exists():
        return {}

    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if not {"id", "date"} <= set(frame.columns):
        raise PipelineError("corpus", f"{path} must have columns id,date", "fix the sidecar header")

    dates = {}
    for row in frame.itertuples(index=False):
        if not row.date:
            continue
        try:
            dates[row.id] = dt.date.fromisoformat(row.date.strip())
        except ValueError:
            logger.warning(f"Ignoring unparseable date '{row.date}' for '{row.id}' in {path.name}")
    return dates


def _read_file(path: Path) -> tuple[Path, Optional[str], int, Optional[str]]:
    """Read one file as UTF-8. Returns (path, text, replacements, error)."""
    try:
        raw = path.read_bytes()
    except OSError as e:
        return path, None, 0, f"unreadable: {e}"

    text = raw.decode("utf-8", errors="replace")
    replacements = text.count(REPLACEMENT_CHAR)
    if not text.strip():
        return path, None, replacements, "empty after trimming whitespace"
    return path, text, replacements, None


def ingest_directory(
    path: str | Path,
    date_rule: Optional[DateRule] = None,
    report: Optional[IngestReport] = None,
) -> Corpus:
    """
    Ingest every `*.txt` file of a directory as one Document.

    Args:
        path: Directory holding the documents.
        date_rule: Filename / sidecar date extraction; defaults to ISO prefixes.
        report: Optional IngestReport filled in place with skips and counts.

    Returns:
        Corpus with documents ordered by filename and no windows.
    """
    directory = Path(path)
    rule = date_rule or DateRule()
    report = report if report is not None else IngestReport(directory=str(directory))

    if not directory.is_dir():
        raise PipelineError("corpus", f"input directory not found: {directory}", "check input_dir")

    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix == ".txt")
    report.files_seen = len(files)
    sidecar = _read_sidecar(directory, rule)

    documents = []
    for file_path, text, replacements, error in map(_read_file, files):
        report.replacement_chars += replacements
        if error:
            logger.warning(f"Skipping {file_path.name}: {error}")
            report.skipped.append(SkippedFile(path=str(file_path), reason=error))
            continue
        if replacements:
            logger.warning(f"{file_path.name}: {replacements} undecodable byte(s) replaced")

        doc_id = file_path.stem
        date = rule.parse_filename(file_path.name) or sidecar.get(doc_id)
        if date is None:
            report.undated.append(doc_id)
        documents.append(Document(id=doc_id, text=text, date=date, source_path=str(file_path)))

    report.documents_ingested = len(documents)
    if not documents:
        raise PipelineError("corpus", f"no documents in {directory}", "add .txt files to the input directory")

    logger.info(f"Ingested {len(documents)} documents from {directory} ({len(report.skipped)} skipped)")
    return Corpus(documents=documents)


def define_window(
    corpus: Corpus,
    label: str,
    start: dt.date,
    end: dt.date,
    include_undated: bool = False,
) -> TimeWindow:
    """Select the documents dated within [start, end] into a new window."""
    if start > end:
        raise PipelineError("corpus", f"window '{label}': start {start} is after end {end}")
    if any(w.label == label for w in corpus.windows):
        raise PipelineError("corpus", f"duplicate window label '{label}'", "pick a distinct label")

    window = TimeWindow(label=label, start=start, end=end, include_undated=include_undated)
    doc_ids = [d.id for d in corpus.documents if window.covers(d.date)]
    if not doc_ids:
        logger.warning(f"Window '{label}' ({start} to {end}) contains no documents")
    return window.model_copy(update={"document_ids": doc_ids})


def window_documents(corpus: Corpus, window: TimeWindow) -> list[Document]:
    return [corpus.document(doc_id) for doc_id in window.document_ids]


def documents_per_year(corpus: Corpus) -> dict[int, int]:
    """Count dated documents per calendar year, ordered by year."""
    counts = Counter(d.date.year for d in corpus.documents if d.date is not None)
    return dict(sorted(counts.items()))


def peak_periods(corpus: Corpus, span_years: int = 3, top: int = 3) -> list[tuple[int, int, int]]:
    """
    Rank sliding periods of `span_years` by document count.

    Returns:
        (start_year, end_year, count) tuples, count desc then start asc.
    """
    if span_years < 1:
        raise PipelineError("corpus", "span_years must be >= 1")
    per_year = documents_per_year(corpus)
    if not per_year:
        return []
    first, last = min(per_year), max(per_year)
    periods = []
    for start in range(first, max(first, last - span_years + 1) + 1):
        end = start + span_years - 1
        count = sum(per_year.get(year, 0) for year in range(start, end + 1))
        periods.append((start, end, count))
    periods.sort(key=lambda p: (-p[2], p[0]))
    return periods[:top]

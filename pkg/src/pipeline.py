"""
Semantic Mapper
Orchestrates one analysis run:
Corpus -> Text Preprocessing -> Word/Document Matrix -> Threshold -> Layout -> Export

Also serves the vocabulary report and the snapshot comparison.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from src.corpus import DateRule, define_window, ingest_directory, window_documents
from src.diachrony import compare_snapshots
from src.errors import ConfigError, FramescopeError, PipelineError
from src.export_io import (
    file_label,
    load_snapshot,
    render_svg,
    report_from_snapshot,
    save_snapshot,
    write_matrix_csv,
    write_pajek,
)
from src.layout import kamada_kawai, target_distances
from src.models import (
    Corpus,
    FrequencyList,
    IngestReport,
    LayoutResult,
    RunConfig,
    RunReport,
    SemanticGraph,
    Snapshot,
    SnapshotDiff,
    TimeWindow,
    Vocabulary,
)
from src.netbuild import build_graph, derive_threshold
from src.textprep import (
    build_vocabulary,
    document_frequencies,
    load_stoplist,
    stem_plural,
    window_frequencies,
    write_frequency_csv,
)
from src.vectorspace import (
    SimilarityMatrix,
    WordDocMatrix,
    build_coword_matrix,
    build_word_doc_matrix,
    cosine_matrix,
    pearson_matrix,
)

logger = logging.getLogger(__name__)

# module responsible for each stage, for error reports
STAGE_MODULES = {
    "ingesting": "corpus",
    "preprocessing": "textprep",
    "vectorizing": "vectorspace",
    "thresholding": "netbuild",
    "laying_out": "layout",
    "writing": "export_io",
}


@dataclass
class MapResult:
    """Result of a single `map` run."""
    window_label: str
    snapshot: Optional[Snapshot] = None
    report: Optional[RunReport] = None
    outputs: list[Path] = field(default_factory=list)
    module: Optional[str] = None
    error: Optional[str] = None
    stage: str = "not_started"  # ingesting, preprocessing, vectorizing, thresholding, laying_out, writing, complete, failed


class SemanticMapper:
    """
    Builds the semantic map of one time window and compares two of them.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self._stoplist: Optional[frozenset[str]] = None
        self._corpus: Optional[Corpus] = None
        self.ingest_report: Optional[IngestReport] = None

    @property
    def stoplist(self) -> frozenset[str]:
        if self._stoplist is None:
            self._stoplist = load_stoplist(self.config.stopword_file)
        return self._stoplist

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint(self.stoplist)

    def ingest(self) -> Corpus:
        """Phase 1: Read the input directory and define the configured windows."""
        if self._corpus is not None:
            return self._corpus

        rule = DateRule(
            pattern=self.config.date_pattern,
            fmt=self.config.date_format,
            metadata_file=self.config.metadata_file,
        )
        report = IngestReport(directory=self.config.input_dir)
        corpus = ingest_directory(self.config.input_dir, date_rule=rule, report=report)
        for spec in self.config.windows:
            window = define_window(corpus, spec.label, spec.start, spec.end, include_undated=spec.include_undated)
            corpus = corpus.with_window(window)

        self.ingest_report = report
        self._corpus = corpus
        return corpus

    def window(self, label: str) -> TimeWindow:
        corpus = self.ingest()
        try:
            return corpus.window(label)
        except KeyError:
            known = ", ".join(w.label for w in corpus.windows) or "none"
            raise ConfigError(f"unknown window '{label}'", f"configured windows: {known}") from None

    def preprocess(self, window: TimeWindow) -> tuple[list[FrequencyList], FrequencyList, Vocabulary]:
        """Phase 2: Per-document and window frequency lists, then the vocabulary."""
        corpus = self.ingest()
        if not window.document_ids:
            raise PipelineError("textprep", f"window '{window.label}' contains no documents", "widen the window dates")

        per_doc = [
            document_frequencies(doc, self.stoplist, self.config.plural_min_length)
            for doc in window_documents(corpus, window)
        ]
        window_freq = window_frequencies(window.label, per_doc)
        vocab = build_vocabulary(
            window_freq,
            min_occurrences=self.config.min_occurrences,
            cap=self.config.vocab_cap,
            per_doc=per_doc,
            strict=self.config.strict_cutoff,
        )
        return per_doc, window_freq, vocab

    def vectorize(
        self,
        window: TimeWindow,
        vocab: Vocabulary,
        per_doc: list[FrequencyList],
    ) -> tuple[WordDocMatrix, SimilarityMatrix]:
        """Phase 3: Word/document matrix and the configured similarity matrix."""
        m = build_word_doc_matrix(window, vocab, per_doc, binary=self.config.binary_counts)
        if self.config.similarity == "pearson":
            return m, pearson_matrix(m)
        return m, cosine_matrix(m)

    def threshold(self, c: SimilarityMatrix) -> tuple[float, SimilarityMatrix]:
        """Phase 4a: the derived threshold and `c` carrying the applied one; an override wins."""
        derived = derive_threshold(c)
        if self.config.threshold_override is not None:
            applied = self.config.threshold_override
            logger.info(f"Threshold override {applied:.4f} (derived {derived:.4f})")
            return derived, c.with_threshold(applied)

        applied = min(max(derived, 0.0), 1.0)
        if applied != derived:
            logger.warning(f"Derived threshold {derived:.4f} outside [0, 1]; applying {applied:.4f}")
        return derived, c.with_threshold(applied)

    def lay_out(self, graph: SemanticGraph) -> LayoutResult:
        """Phase 5: Kamada-Kawai embedding."""
        td = target_distances(graph, l0=self.config.layout_l0, k=self.config.layout_k)
        return kamada_kawai(
            graph,
            td,
            seed=self.config.seed,
            epsilon=self.config.layout_epsilon,
            max_iter=self.config.layout_max_iter,
        )

    def build_snapshot(
        self,
        window_label: str,
        progress_callback: Optional[Callable] = None,
        result: Optional[MapResult] = None,
    ) -> Snapshot:
        """
        Run every analysis stage for one window.

        Args:
            window_label: A window defined in the config.
            progress_callback: Optional callable(message: str) for progress updates.
            result: Optional MapResult whose `stage` tracks progress.

        Returns:
            The complete Snapshot (nothing is written).
        """
        result = result if result is not None else MapResult(window_label=window_label)

        def _log(msg: str):
            logger.info(msg)
            if progress_callback:
                progress_callback(msg)

        result.stage = "ingesting"
        _log(f"Phase 1: Ingesting {self.config.input_dir}...")
        window = self.window(window_label)
        _log(f"Window '{window.label}': {len(window.document_ids)} documents")

        result.stage = "preprocessing"
        _log("Phase 2: Building frequency lists and vocabulary...")
        per_doc, _, vocab = self.preprocess(window)
        _log(f"Vocabulary: {len(vocab.included)} included, {len(vocab.excluded)} excluded")

        result.stage = "vectorizing"
        _log(f"Phase 3: Computing {self.config.similarity} similarities...")
        m, c = self.vectorize(window, vocab, per_doc)

        result.stage = "thresholding"
        _log("Phase 4: Thresholding the similarity matrix...")
        derived, c = self.threshold(c)
        applied = c.threshold
        graph = build_graph(
            c,
            vocab,
            applied,
            derived_threshold=derived,
            log_base=self.config.size_log_base,
            size_epsilon=self.config.size_epsilon,
        )
        _log(f"Graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")

        result.stage = "laying_out"
        _log("Phase 5: Laying out the semantic map...")
        layout = self.lay_out(graph)

        similarity = [[None if np.isnan(v) else float(v) for v in row] for row in c.cells]
        return Snapshot(
            window_label=window.label,
            config_fingerprint=self.fingerprint,
            config=self.config.model_dump(mode="json", exclude={"out_dir"}),
            doc_ids=list(window.document_ids),
            vocab=vocab,
            counts=m.cells.tolist(),
            measure=c.measure,
            similarity=similarity,
            derived_threshold=derived,
            applied_threshold=applied,
            graph=graph,
            layout=layout,
        )

    def write_outputs(self, snapshot: Snapshot, out_dir: str | Path) -> list[Path]:
        """Phase 6: Native snapshot, Pajek, SVG, CSV matrices and the run report."""
        directory = Path(out_dir)
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise PipelineError("export_io", f"cannot create {directory}: {e}", "check out_dir") from e

        base = directory / file_label(snapshot.window_label)
        words = snapshot.vocab.included_stems()
        m = WordDocMatrix(words=words, docs=snapshot.doc_ids, cells=np.array(snapshot.counts, dtype=np.int64))
        coword = build_coword_matrix(m)
        similarity = np.array(
            [[np.nan if v is None else v for v in row] for row in snapshot.similarity], dtype=np.float64
        )
        frequencies = FrequencyList(
            scope=snapshot.window_label,
            counts={e.stem: e.window_frequency for e in snapshot.vocab.entries},
        )
        report = report_from_snapshot(snapshot)

        outputs = [
            save_snapshot(snapshot, f"{base}.snapshot"),
            write_pajek(snapshot.graph, snapshot.layout, f"{base}.net"),
            render_svg(snapshot.graph, snapshot.layout, f"{base}.svg"),
            write_matrix_csv(words, snapshot.doc_ids, m.cells, f"{base}_worddoc.csv"),
            write_matrix_csv(words, words, coword.cells, f"{base}_coword.csv"),
            write_matrix_csv(words, words, similarity, f"{base}_{snapshot.measure}.csv"),
            write_frequency_csv(frequencies, f"{base}_frequencies.csv"),
        ]
        report_path = Path(f"{base}_report.json")
        try:
            report_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise PipelineError("export_io", f"cannot write {report_path}: {e}") from e
        outputs.append(report_path)
        return outputs

    def run_map(
        self,
        window_label: str,
        out_dir: Optional[str | Path] = None,
        progress_callback: Optional[Callable] = None,
    ) -> MapResult:
        """
        Run the full pipeline end-to-end for a single window.

        Args:
            window_label: A window defined in the config.
            out_dir: Output directory (defaults to config.out_dir).
            progress_callback: Optional callable(message: str) for progress updates.

        Returns:
            MapResult with the snapshot, report and written files; failures
            are recorded on the result, never raised.
        """
        result = MapResult(window_label=window_label)

        def _log(msg: str):
            logger.info(msg)
            if progress_callback:
                progress_callback(msg)

        try:
            result.snapshot = self.build_snapshot(window_label, progress_callback=progress_callback, result=result)

            result.stage = "writing"
            target = Path(out_dir if out_dir is not None else self.config.out_dir)
            _log(f"Phase 6: Writing outputs to {target}...")
            result.outputs = self.write_outputs(result.snapshot, target)
            result.report = report_from_snapshot(result.snapshot)

            result.stage = "complete"
            if not result.report.converged:
                _log("Warning: layout did not converge; the map may be unsettled")
            _log(f"Map for '{window_label}' complete: {len(result.outputs)} files written")

        except Exception as e:
            result.module = e.module if isinstance(e, FramescopeError) else STAGE_MODULES.get(result.stage, "pipeline")
            result.error = e.message if isinstance(e, FramescopeError) else str(e)
            if isinstance(e, FramescopeError) and e.hint:
                result.error += f" (hint: {e.hint})"
            result.stage = "failed"
            logger.error(f"Pipeline error: {e}", exc_info=True)
            _log(f"Error: {e}")

        return result

    def vocabulary(self, window_label: str) -> tuple[FrequencyList, Vocabulary]:
        """Window frequency list and vocabulary, for the `vocab` report."""
        window = self.window(window_label)
        _, window_freq, vocab = self.preprocess(window)
        return window_freq, vocab

    def window_frequency_lists(self) -> list[FrequencyList]:
        """Frequency list of every configured window (for focal-word candidates)."""
        corpus = self.ingest()
        lists = []
        for window in corpus.windows:
            per_doc = [
                document_frequencies(doc, self.stoplist, self.config.plural_min_length)
                for doc in window_documents(corpus, window)
            ]
            if per_doc:
                lists.append(window_frequencies(window.label, per_doc))
        return lists

    def compare(
        self,
        before_path: str | Path,
        after_path: str | Path,
        focal: Optional[list[str]] = None,
    ) -> SnapshotDiff:
        """Load two snapshot files and compute the drift between them."""
        before, after = load_snapshot(before_path), load_snapshot(after_path)
        words = focal if focal is not None else self.config.focal_words
        stems = [stem_plural(w.strip().lower(), self.config.plural_min_length) for w in words if w.strip()]
        return compare_snapshots(before, after, stems)

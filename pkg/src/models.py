"""Pydantic models for structured data throughout the pipeline."""

import datetime as dt
import hashlib
import json
import math
from enum import Enum
from typing import Iterable, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# --- Corpus ---

class Document(BaseModel):
    """A single plain-text document (one file of the input directory)."""
    model_config = ConfigDict(frozen=True)

    id: str
    text: str
    date: Optional[dt.date] = None
    source_path: str = ""

    @field_validator("text")
    @classmethod
    def _text_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("document text is empty after trimming whitespace")
        return value


class TimeWindow(BaseModel):
    """A labeled, inclusive date range and the documents that fall in it."""
    model_config = ConfigDict(frozen=True)

    label: str
    start: dt.date
    end: dt.date
    document_ids: list[str] = Field(default_factory=list)
    include_undated: bool = False

    @model_validator(mode="after")
    def _ordered_bounds(self) -> "TimeWindow":
        if self.start > self.end:
            raise ValueError(f"window '{self.label}': start {self.start} is after end {self.end}")
        return self

    def covers(self, day: Optional[dt.date]) -> bool:
        if day is None:
            return self.include_undated
        return self.start <= day <= self.end


class Corpus(BaseModel):
    """Immutable set of documents plus the windows defined over them."""
    model_config = ConfigDict(frozen=True)

    documents: list[Document] = Field(default_factory=list)
    windows: list[TimeWindow] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self) -> "Corpus":
        ids = [d.id for d in self.documents]
        if len(ids) != len(set(ids)):
            raise ValueError("document ids must be unique within a corpus")
        labels = [w.label for w in self.windows]
        if len(labels) != len(set(labels)):
            raise ValueError("window labels must be unique within a corpus")
        by_id = {d.id: d for d in self.documents}
        for window in self.windows:
            for doc_id in window.document_ids:
                doc = by_id.get(doc_id)
                if doc is None:
                    raise ValueError(f"window '{window.label}' references unknown document '{doc_id}'")
                if doc.date is not None and not window.start <= doc.date <= window.end:
                    raise ValueError(f"document '{doc_id}' dated {doc.date} lies outside window '{window.label}'")
        return self

    def document(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)

    def window(self, label: str) -> TimeWindow:
        for window in self.windows:
            if window.label == label:
                return window
        raise KeyError(label)

    def with_window(self, window: TimeWindow) -> "Corpus":
        """Return a new corpus with `window` appended."""
        return Corpus(documents=self.documents, windows=[*self.windows, window])


class SkippedFile(BaseModel):
    path: str
    reason: str


class IngestReport(BaseModel):
    """What happened while reading an input directory."""
    directory: str
    files_seen: int = 0
    documents_ingested: int = 0
    skipped: list[SkippedFile] = Field(default_factory=list)
    replacement_chars: int = 0
    undated: list[str] = Field(default_factory=list)


# --- Text preprocessing ---

class Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    surface: str
    stem: str

    @field_validator("stem")
    @classmethod
    def _stem_lower(cls, value: str) -> str:
        if not value:
            raise ValueError("stem must be non-empty")
        if value != value.lower():
            raise ValueError(f"stem '{value}' must be lowercase")
        return value


class FrequencyList(BaseModel):
    """Stem counts for one document (scope = document id) or one window."""
    scope: str
    counts: dict[str, int] = Field(default_factory=dict)

    @field_validator("counts")
    @classmethod
    def _positive(cls, value: dict[str, int]) -> dict[str, int]:
        for stem, count in value.items():
            if count < 1:
                raise ValueError(f"count for '{stem}' must be >= 1, got {count}")
        return value

    def most_common(self, n: Optional[int] = None) -> list[tuple[str, int]]:
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if n is None else ranked[:n]


class VocabEntry(BaseModel):
    stem: str
    window_frequency: int
    doc_frequency: int
    included: bool = False


class Vocabulary(BaseModel):
    """Window vocabulary; excluded entries are kept for reporting."""
    entries: list[VocabEntry] = Field(default_factory=list)
    min_occurrences: int
    cap: int
    strict: bool = True  # True: frequency > min_occurrences; False: >=

    @model_validator(mode="after")
    def _invariants(self) -> "Vocabulary":
        keys = [(-e.window_frequency, e.stem) for e in self.entries]
        if keys != sorted(keys):
            raise ValueError("vocabulary entries must be sorted by (frequency desc, stem asc)")
        included = [e for e in self.entries if e.included]
        if len(included) > self.cap:
            raise ValueError(f"{len(included)} included entries exceed cap {self.cap}")
        for entry in included:
            if not self.passes_cutoff(entry.window_frequency):
                raise ValueError(f"included stem '{entry.stem}' does not pass the frequency cutoff")
        return self

    def passes_cutoff(self, frequency: int) -> bool:
        if self.strict:
            return frequency > self.min_occurrences
        return frequency >= self.min_occurrences

    @property
    def included(self) -> list[VocabEntry]:
        return [e for e in self.entries if e.included]

    @property
    def excluded(self) -> list[VocabEntry]:
        return [e for e in self.entries if not e.included]

    def included_stems(self) -> list[str]:
        return [e.stem for e in self.entries if e.included]

    def all_stems(self) -> set[str]:
        return {e.stem for e in self.entries}

    def frequency(self, stem: str) -> int:
        for entry in self.entries:
            if entry.stem == stem:
                return entry.window_frequency
        raise KeyError(stem)


# --- Network and layout ---

class GraphNode(BaseModel):
    stem: str
    frequency: int
    size: float


class GraphEdge(BaseModel):
    source: str
    target: str
    weight: float


class SemanticGraph(BaseModel):
    """Thresholded word network; isolates already removed."""
    nodes: list[GraphNode]
    edges: list[GraphEdge]
    threshold_used: float
    derived_threshold: Optional[float] = None
    isolates: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _invariants(self) -> "SemanticGraph":
        if not self.nodes:
            raise ValueError("semantic graph has no nodes")
        stems = [n.stem for n in self.nodes]
        if len(stems) != len(set(stems)):
            raise ValueError("duplicate node stems")
        known = set(stems)
        degree = dict.fromkeys(stems, 0)
        seen = set()
        for edge in self.edges:
            if edge.source == edge.target:
                raise ValueError(f"self-loop on '{edge.source}'")
            if edge.source > edge.target:
                raise ValueError(f"edge ({edge.source}, {edge.target}) not in lexicographic order")
            if edge.source not in known or edge.target not in known:
                raise ValueError(f"edge ({edge.source}, {edge.target}) references an unknown node")
            if edge.weight < self.threshold_used:
                raise ValueError(
                    f"edge ({edge.source}, {edge.target}) weight {edge.weight} below threshold {self.threshold_used}"
                )
            if (edge.source, edge.target) in seen:
                raise ValueError(f"duplicate edge ({edge.source}, {edge.target})")
            seen.add((edge.source, edge.target))
            degree[edge.source] += 1
            degree[edge.target] += 1
        isolated = [s for s, d in degree.items() if d == 0]
        if isolated:
            raise ValueError(f"graph contains isolated nodes: {isolated[:5]}")
        return self

    def stems(self) -> list[str]:
        return [n.stem for n in self.nodes]

    def node(self, stem: str) -> GraphNode:
        for node in self.nodes:
            if node.stem == stem:
                return node
        raise KeyError(stem)

    def has_node(self, stem: str) -> bool:
        return any(n.stem == stem for n in self.nodes)


class LayoutResult(BaseModel):
    """2-D embedding of a semantic graph."""
    positions: dict[str, tuple[float, float]]
    initial_energy: Optional[float] = None
    final_energy: Optional[float] = None
    iterations: int = 0
    seed: int = 0
    converged: bool = True
    # accepted-move energies; diagnostic only, never serialized
    energy_trace: list[float] = Field(default_factory=list, exclude=True)

    @model_validator(mode="after")
    def _finite(self) -> "LayoutResult":
        for stem, (x, y) in self.positions.items():
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite position for '{stem}'")
        if self.initial_energy is not None and self.final_energy is not None:
            if self.final_energy > self.initial_energy + 1e-9 * max(1.0, abs(self.initial_energy)):
                raise ValueError("final energy exceeds initial energy")
        return self


# --- Snapshots and drift ---

class Snapshot(BaseModel):
    """Full analysis state for one time window."""
    window_label: str
    config_fingerprint: str
    config: dict = Field(default_factory=dict)
    doc_ids: list[str] = Field(default_factory=list)
    vocab: Vocabulary
    counts: list[list[int]] = Field(default_factory=list)
    measure: str = "cosine"
    similarity: list[list[Optional[float]]] = Field(default_factory=list)
    derived_threshold: float
    applied_threshold: float
    graph: SemanticGraph
    layout: LayoutResult

    @model_validator(mode="after")
    def _graph_in_vocab(self) -> "Snapshot":
        included = set(self.vocab.included_stems())
        stray = [s for s in self.graph.stems() if s not in included]
        if stray:
            raise ValueError(f"graph nodes not in the included vocabulary: {stray[:5]}")
        missing = [s for s in self.graph.stems() if s not in self.layout.positions]
        if missing:
            raise ValueError(f"layout is missing positions for: {missing[:5]}")
        return self


class Verdict(str, Enum):
    MOVED_COREWARD = "moved-coreward"
    MOVED_PERIPHERYWARD = "moved-peripheryward"
    STABLE = "stable"
    ENTERED = "entered"
    EXITED = "exited"


class Trajectory(BaseModel):
    stem: str
    centrality_before: Optional[float] = None
    centrality_after: Optional[float] = None
    centroid_distance_before: Optional[float] = None
    centroid_distance_after: Optional[float] = None
    verdict: Verdict


class EmergingTerm(BaseModel):
    stem: str
    weighted_degree: float
    is_compound: bool = False


class SnapshotDiff(BaseModel):
    before_label: str
    after_label: str
    focal_trajectories: list[Trajectory] = Field(default_factory=list)
    emerging_terms: list[EmergingTerm] = Field(default_factory=list)
    absent: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    def trajectory(self, stem: str) -> Trajectory:
        for trajectory in self.focal_trajectories:
            if trajectory.stem == stem:
                return trajectory
        raise KeyError(stem)

    def emerging(self, stem: str) -> Optional[EmergingTerm]:
        return next((t for t in self.emerging_terms if t.stem == stem), None)


# --- Run configuration and reports ---

DEFAULT_FOCAL_WORDS = ["product", "sweetener", "food", "sugar", "diet"]


class WindowSpec(BaseModel):
    label: str
    start: dt.date
    end: dt.date
    include_undated: bool = False


# Fields that decide whether two snapshots were produced by the same method.
FINGERPRINT_FIELDS = (
    "min_occurrences", "vocab_cap", "strict_cutoff", "similarity", "binary_counts",
    "plural_min_length", "size_log_base", "size_epsilon",
    "layout_l0", "layout_k", "layout_epsilon", "layout_max_iter", "seed",
)


class RunConfig(BaseModel):
    """One reproducible analysis configuration (JSON file + CLI overrides)."""
    input_dir: str = "corpus"
    out_dir: str = "out"
    stopword_file: Optional[str] = None  # None: bundled USPTO list
    date_pattern: str = r"^(\d{4}-\d{2}-\d{2})"
    date_format: str = "%Y-%m-%d"
    metadata_file: str = "metadata.csv"
    min_occurrences: int
    vocab_cap: int = 100
    strict_cutoff: bool = True
    plural_min_length: int = 4
    threshold_override: Optional[float] = None
    similarity: Literal["cosine", "pearson"] = "cosine"
    binary_counts: bool = False
    size_log_base: Optional[float] = None  # None: natural log
    size_epsilon: float = 0.1
    seed: int = 42
    layout_l0: float = 1.0
    layout_k: float = 1.0
    layout_epsilon: float = 1e-4
    layout_max_iter: Optional[int] = None  # None: 1000 node-moves per node
    windows: list[WindowSpec] = Field(default_factory=list)
    focal_words: list[str] = Field(default_factory=lambda: list(DEFAULT_FOCAL_WORDS))

    @field_validator("min_occurrences")
    @classmethod
    def _min_occ(cls, value: int) -> int:
        if value < 0:
            raise ValueError("min_occurrences must be >= 0")
        return value

    @field_validator("vocab_cap")
    @classmethod
    def _cap(cls, value: int) -> int:
        if value < 1:
            raise ValueError("vocab_cap must be >= 1")
        return value

    @field_validator("threshold_override")
    @classmethod
    def _threshold(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 <= value <= 1.0:
            raise ValueError("threshold_override must lie in [0, 1]")
        return value

    @field_validator("layout_epsilon")
    @classmethod
    def _epsilon(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("layout_epsilon must be > 0")
        return value

    @field_validator("layout_max_iter")
    @classmethod
    def _max_iter(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("layout_max_iter must be >= 1")
        return value

    @model_validator(mode="after")
    def _unique_windows(self) -> "RunConfig":
        labels = [w.label for w in self.windows]
        if len(labels) != len(set(labels)):
            raise ValueError("window labels must be unique")
        return self

    def canonical(self, stopwords: Iterable[str] = ()) -> str:
        """Canonical JSON of the method-defining fields."""
        payload = {name: getattr(self, name) for name in FINGERPRINT_FIELDS}
        words = "\n".join(sorted(set(stopwords)))
        payload["stopwords_sha256"] = hashlib.sha256(words.encode("utf-8")).hexdigest()
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def fingerprint(self, stopwords: Iterable[str] = ()) -> str:
        return hashlib.sha256(self.canonical(stopwords).encode("utf-8")).hexdigest()


class RunReport(BaseModel):
    """Summary of one `map` run; every value derives from the snapshot."""
    window_label: str
    config_fingerprint: str
    measure: str
    document_count: int
    vocabulary_size: int
    excluded_count: int
    matrix_shape: tuple[int, int]
    derived_threshold: float
    applied_threshold: float
    node_count: int
    edge_count: int
    isolates_removed: int
    converged: bool
    iterations: int
    final_energy: Optional[float] = None

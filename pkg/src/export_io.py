"""
Export Module
Writes semantic maps to Pajek .net and SVG, matrices and drift reports to
CSV / text tables, and whole snapshots to the native round-trip format.
"""

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import drawsvg as draw
import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.errors import PipelineError
from src.models import GraphEdge, GraphNode, LayoutResult, RunReport, SemanticGraph, Snapshot, SnapshotDiff

logger = logging.getLogger(__name__)

SNAPSHOT_HEADER = "framescope-snapshot v1"
CSV_FLOAT = "%.6f"

_VERTEX_RE = re.compile(r'^(\d+)\s+"((?:[^"]|"")*)"\s+(\S+)\s+(\S+)\s+(\S+)$')
_EDGE_RE = re.compile(r"^(\d+)\s+(\d+)\s+(\S+)$")


def _write_text(path: str | Path, text: str) -> Path:
    out = Path(path)
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise PipelineError("export_io", f"cannot write {out}: {e}", "check that the output directory exists") from e
    return out


def file_label(label: str) -> str:
    """Window label made safe for use in a filename."""
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_") or "window"


def diff_stem(diff: SnapshotDiff) -> str:
    return f"{file_label(diff.before_label)}_{file_label(diff.after_label)}"


def _check_coverage(g: SemanticGraph, l: LayoutResult) -> None:
    missing = [s for s in g.stems() if s not in l.positions]
    if missing:
        raise PipelineError("export_io", f"layout has no position for: {missing[:5]}")


def normalize_positions(g: SemanticGraph, l: LayoutResult) -> dict[str, tuple[float, float]]:
    """Min-max scale each axis into [0, 1]; a flat axis maps to 0.5."""
    stems = g.stems()
    points = np.array([l.positions[s] for s in stems], dtype=np.float64)
    low, high = points.min(axis=0), points.max(axis=0)
    span = high - low
    scaled = np.where(span > 0, (points - low) / np.where(span > 0, span, 1.0), 0.5)
    return {s: (float(x), float(y)) for s, (x, y) in zip(stems, scaled)}


# --- Pajek ---

def _quote(label: str) -> str:
    return '"' + label.replace('"', '""') + '"'


def write_pajek(g: SemanticGraph, l: LayoutResult, path: str | Path) -> Path:
    """
    Write `*Vertices n` / `*Edges` with 1-based indices, unit-box coordinates
    and six fractional digits.
    """
    if not g.nodes:
        raise PipelineError("export_io", "cannot write an empty graph")
    _check_coverage(g, l)

    positions = normalize_positions(g, l)
    index = {s: i for i, s in enumerate(g.stems(), start=1)}
    lines = [f"*Vertices {len(g.nodes)}"]
    for node in g.nodes:
        x, y = positions[node.stem]
        lines.append(f"{index[node.stem]} {_quote(node.stem)} {x:.6f} {y:.6f} {node.size:.6f}")
    lines.append("*Edges")
    for edge in g.edges:
        lines.append(f"{index[edge.source]} {index[edge.target]} {edge.weight:.6f}")
    return _write_text(path, "\n".join(lines) + "\n")


def read_pajek(path: str | Path) -> tuple[SemanticGraph, LayoutResult]:
    """
    Parse the Pajek subset written by write_pajek.

    Node frequencies are recovered as round(exp(size)), which assumes sizes
    were written with the natural log.
    """
    source = Path(path)
    try:
        lines = source.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise PipelineError("export_io", f"cannot read {source}: {e}") from e

    def fail(lineno: int, message: str) -> PipelineError:
        return PipelineError("export_io", f"{source.name} line {lineno}: {message}")

    expected: Optional[int] = None
    section = None
    labels: list[str] = []
    nodes: list[GraphNode] = []
    positions: dict[str, tuple[float, float]] = {}
    edges: list[GraphEdge] = []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered.startswith("*vertices"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise fail(lineno, f"malformed vertices header '{line}'")
            expected, section = int(parts[1]), "vertices"
            continue
        if lowered.startswith("*edges"):
            if section != "vertices":
                raise fail(lineno, "*Edges before *Vertices")
            if len(labels) != expected:
                raise fail(lineno, f"expected {expected} vertices, found {len(labels)}")
            section = "edges"
            continue

        if section == "vertices":
            match = _VERTEX_RE.match(line)
            if not match:
                raise fail(lineno, f"malformed vertex line '{line}'")
            idx = int(match.group(1))
            if idx != len(labels) + 1:
                raise fail(lineno, f"vertex index gap: expected {len(labels) + 1}, got {idx}")
            try:
                x, y, size = (float(match.group(k)) for k in (3, 4, 5))
            except ValueError:
                raise fail(lineno, f"non-numeric vertex field in '{line}'") from None
            label = match.group(2).replace('""', '"')
            labels.append(label)
            nodes.append(GraphNode(stem=label, frequency=max(1, round(math.exp(size))), size=size))
            positions[label] = (x, y)
        elif section == "edges":
            match = _EDGE_RE.match(line)
            if not match:
                raise fail(lineno, f"malformed edge line '{line}'")
            a, b = int(match.group(1)), int(match.group(2))
            if not (1 <= a <= len(labels) and 1 <= b <= len(labels)):
                raise fail(lineno, f"edge references a missing vertex ({a}, {b})")
            try:
                weight = float(match.group(3))
            except ValueError:
                raise fail(lineno, f"non-numeric edge weight in '{line}'") from None
            if weight <= 0:
                raise fail(lineno, f"edge weight must be > 0, got {weight}")
            source_label, target_label = sorted((labels[a - 1], labels[b - 1]))
            edges.append(GraphEdge(source=source_label, target=target_label, weight=weight))
        else:
            raise fail(lineno, f"unexpected line before *Vertices: '{line}'")

    if expected is None:
        raise PipelineError("export_io", f"{source.name}: no *Vertices section")
    if section == "vertices" and len(labels) != expected:
        raise PipelineError("export_io", f"{source.name}: expected {expected} vertices, found {len(labels)}")

    edges.sort(key=lambda e: (e.source, e.target))
    try:
        graph = SemanticGraph(
            nodes=nodes,
            edges=edges,
            threshold_used=min((e.weight for e in edges), default=0.0),
        )
    except ValidationError as e:
        raise PipelineError("export_io", f"{source.name} is not a valid semantic graph: {e.errors()[0]['msg']}") from e
    return graph, LayoutResult(positions=positions)


# --- SVG ---

@dataclass
class SvgOptions:
    unit: float = 160.0       # pixels per layout unit
    margin: float = 40.0
    node_scale: float = 6.0   # radius = node size * node_scale
    edge_scale: float = 3.0   # stroke width = weight * edge_scale
    font_size: float = 11.0
    background: str = "#ffffff"
    node_fill: str = "#4a8fd9"
    node_stroke: str = "#1e2a3a"
    edge_stroke: str = "#8c95a1"
    text_fill: str = "#1e2a3a"
    decimals: int = 4


def render_svg(
    g: SemanticGraph,
    l: LayoutResult,
    path: str | Path,
    options: Optional[SvgOptions] = None,
) -> Path:
    """Draw the semantic map: edges, then node circles, then labels."""
    opts = options or SvgOptions()
    _check_coverage(g, l)

    stems = g.stems()
    points = np.array([l.positions[s] for s in stems], dtype=np.float64)
    radii = {n.stem: round(n.size * opts.node_scale, opts.decimals) for n in g.nodes}
    pad = opts.margin + max(radii.values())
    low, high = points.min(axis=0), points.max(axis=0)
    width = round(float(high[0] - low[0]) * opts.unit + 2 * pad, opts.decimals)
    height = round(float(high[1] - low[1]) * opts.unit + 2 * pad, opts.decimals)

    def pixel(stem: str) -> tuple[float, float]:
        x, y = l.positions[stem]
        # flip y so the map reads with "up" as larger y
        return (
            round((x - low[0]) * opts.unit + pad, opts.decimals),
            round((high[1] - y) * opts.unit + pad, opts.decimals),
        )

    drawing = draw.Drawing(width, height)
    drawing.append(draw.Rectangle(0, 0, width, height, fill=opts.background))
    for edge in g.edges:
        (x1, y1), (x2, y2) = pixel(edge.source), pixel(edge.target)
        drawing.append(draw.Line(
            x1, y1, x2, y2,
            stroke=opts.edge_stroke,
            stroke_width=round(edge.weight * opts.edge_scale, opts.decimals),
        ))
    for stem in stems:
        x, y = pixel(stem)
        drawing.append(draw.Circle(x, y, radii[stem], fill=opts.node_fill, stroke=opts.node_stroke, stroke_width=1))
    for stem in stems:
        x, y = pixel(stem)
        drawing.append(draw.Text(stem, opts.font_size, x, round(y - radii[stem] - 2, opts.decimals),
                                 fill=opts.text_fill, text_anchor="middle"))

    out = Path(path)
    try:
        drawing.save_svg(str(out))
    except OSError as e:
        raise PipelineError("export_io", f"cannot write {out}: {e}", "check that the output directory exists") from e
    return out


# --- CSV and text tables ---

def write_matrix_csv(
    rows: Sequence[str],
    columns: Sequence[str],
    cells: np.ndarray,
    path: str | Path,
) -> Path:
    """Matrix with stem headers; floats fixed to six decimals, NaN left empty."""
    frame = pd.DataFrame(cells, index=list(rows), columns=list(columns))
    out = Path(path)
    try:
        frame.to_csv(out, float_format=CSV_FLOAT, na_rep="", index_label="", lineterminator="\n")
    except OSError as e:
        raise PipelineError("export_io", f"cannot write {out}: {e}") from e
    return out


def _diff_frames(diff: SnapshotDiff) -> tuple[pd.DataFrame, pd.DataFrame]:
    trajectories = pd.DataFrame(
        [t.model_dump(mode="json") for t in diff.focal_trajectories]
        + [{"stem": s, "verdict": "absent"} for s in diff.absent],
        columns=["stem", "centrality_before", "centrality_after",
                 "centroid_distance_before", "centroid_distance_after", "verdict"],
    )
    emerging = pd.DataFrame(
        [t.model_dump() for t in diff.emerging_terms],
        columns=["stem", "weighted_degree", "is_compound"],
    )
    return trajectories, emerging


def write_diff_csv(diff: SnapshotDiff, out_dir: str | Path) -> list[Path]:
    """Write `<before>_<after>_trajectories.csv` and `..._emerging.csv`."""
    directory = Path(out_dir)
    trajectories, emerging = _diff_frames(diff)
    stem = diff_stem(diff)
    paths = [directory / f"{stem}_trajectories.csv", directory / f"{stem}_emerging.csv"]
    for frame, out in zip((trajectories, emerging), paths):
        try:
            frame.to_csv(out, index=False, float_format=CSV_FLOAT, na_rep="", lineterminator="\n")
        except OSError as e:
            raise PipelineError("export_io", f"cannot write {out}: {e}") from e
    return paths


def diff_table(diff: SnapshotDiff) -> str:
    """Human-readable rendering of a SnapshotDiff."""
    trajectories, emerging = _diff_frames(diff)
    parts = [f"Frame drift: {diff.before_label} -> {diff.after_label}", "", "Focal words"]
    parts.append(trajectories.to_string(index=False, na_rep="-", float_format=lambda v: f"{v:.4f}")
                 if len(trajectories) else "(none)")
    parts += ["", "Emerging terms"]
    parts.append(emerging.to_string(index=False, float_format=lambda v: f"{v:.4f}")
                 if len(emerging) else "(none)")
    if diff.notes:
        parts += ["", "Notes"] + [f"- {note}" for note in diff.notes]
    return "\n".join(parts) + "\n"


def write_diff_table(diff: SnapshotDiff, out_dir: str | Path) -> Path:
    """Write `<before>_<after>_diff.txt` and return its path."""
    return _write_text(Path(out_dir) / f"{diff_stem(diff)}_diff.txt", diff_table(diff))


# --- Native snapshot format ---

def save_snapshot(snapshot: Snapshot, path: str | Path) -> Path:
    """Header line followed by the full-precision JSON body."""
    return _write_text(path, f"{SNAPSHOT_HEADER}\n{snapshot.model_dump_json(indent=1)}\n")


def load_snapshot(path: str | Path) -> Snapshot:
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise PipelineError("export_io", f"cannot read snapshot {source}: {e}", "run `framescope map` first") from e

    header, _, body = text.partition("\n")
    if header.strip() != SNAPSHOT_HEADER:
        raise PipelineError("export_io", f"{source.name} is not a {SNAPSHOT_HEADER} file (header '{header[:40]}')")
    try:
        return Snapshot.model_validate_json(body)
    except ValidationError as e:
        raise PipelineError("export_io", f"corrupt snapshot {source.name}: {e.errors()[0]['msg']}") from e


def report_from_snapshot(snapshot: Snapshot) -> RunReport:
    """Recompute the run report from a snapshot alone."""
    included = len(snapshot.vocab.included)
    return RunReport(
        window_label=snapshot.window_label,
        config_fingerprint=snapshot.config_fingerprint,
        measure=snapshot.measure,
        document_count=len(snapshot.doc_ids),
        vocabulary_size=included,
        excluded_count=len(snapshot.vocab.excluded),
        matrix_shape=(included, len(snapshot.doc_ids)),
        derived_threshold=snapshot.derived_threshold,
        applied_threshold=snapshot.applied_threshold,
        node_count=len(snapshot.graph.nodes),
        edge_count=len(snapshot.graph.edges),
        isolates_removed=included - len(snapshot.graph.nodes),
        converged=snapshot.layout.converged,
        iterations=snapshot.layout.iterations,
        final_energy=snapshot.layout.final_energy,
    )

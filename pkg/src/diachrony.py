"""
Diachrony Module
Compares two window snapshots: whether focal words move toward the core or
the periphery of the map, and which terms newly enter it.
"""

import logging

import numpy as np

from src.errors import PipelineError
from src.models import EmergingTerm, Snapshot, SnapshotDiff, Trajectory, Verdict
from src.netbuild import weighted_degree

logger = logging.getLogger(__name__)


def centroid_distance(s: Snapshot, stem: str) -> float:
    """
    Distance of a node to the size-weighted centroid of the map, divided by
    the largest such distance in the snapshot (so the result is in [0, 1]).
    """
    if not s.graph.has_node(stem):
        raise PipelineError("diachrony", f"unknown node '{stem}' in snapshot '{s.window_label}'")

    stems = s.graph.stems()
    sizes = np.array([n.size for n in s.graph.nodes], dtype=np.float64)
    points = np.array([s.layout.positions[w] for w in stems], dtype=np.float64)
    centroid = (sizes[:, None] * points).sum(axis=0) / sizes.sum()
    distances = np.sqrt(((points - centroid) ** 2).sum(axis=1))

    farthest = float(distances.max())
    if farthest == 0.0:
        return 0.0
    return float(distances[stems.index(stem)] / farthest)


def _verdict(t: Trajectory) -> Verdict:
    if t.centrality_before is None:
        return Verdict.ENTERED
    if t.centrality_after is None:
        return Verdict.EXITED
    degree_up = t.centrality_after > t.centrality_before
    degree_down = t.centrality_after < t.centrality_before
    closer = t.centroid_distance_after < t.centroid_distance_before
    farther = t.centroid_distance_after > t.centroid_distance_before
    # both signals must agree
    if degree_up and closer:
        return Verdict.MOVED_COREWARD
    if degree_down and farther:
        return Verdict.MOVED_PERIPHERYWARD
    return Verdict.STABLE


def _compound_head_or_tail(stem: str, known: set[str]) -> bool:
    if "-" not in stem.strip("-"):
        return False
    parts = stem.split("-")
    return any(part != stem and part in known for part in (parts[0], parts[-1]))


def detect_emerging_terms(before: Snapshot, after: Snapshot) -> list[EmergingTerm]:
    """
    Stems in the after-map that the before-window never used.

    The before-vocabulary includes excluded entries, so a word that only
    crossed the frequency cutoff is not reported as emerging. Ranked by
    weighted degree (desc), then stem.
    """
    previously_seen = before.vocab.all_stems()
    known = previously_seen | after.vocab.all_stems()

    terms = []
    for stem in after.graph.stems():
        if stem in previously_seen:
            continue
        terms.append(EmergingTerm(
            stem=stem,
            weighted_degree=weighted_degree(after.graph, stem),
            is_compound=_compound_head_or_tail(stem, known),
        ))
    terms.sort(key=lambda t: (-t.weighted_degree, t.stem))
    return terms


def compare_snapshots(before: Snapshot, after: Snapshot, focal: list[str]) -> SnapshotDiff:
    """
    Trajectories of the focal words plus the emerging-term report.

    Raises:
        PipelineError: if the snapshots were built with different settings.
    """
    if before.config_fingerprint != after.config_fingerprint:
        raise PipelineError(
            "diachrony",
            "snapshots not comparable",
            f"config fingerprints differ ({before.config_fingerprint[:12]} vs {after.config_fingerprint[:12]}); "
            "rebuild both windows with the same settings",
        )

    diff = SnapshotDiff(before_label=before.window_label, after_label=after.window_label)
    for stem in dict.fromkeys(focal):
        in_before, in_after = before.graph.has_node(stem), after.graph.has_node(stem)
        if not (in_before or in_after):
            diff.absent.append(stem)
            diff.notes.append(f"'{stem}' is in neither map")
            continue

        trajectory = Trajectory(stem=stem, verdict=Verdict.STABLE)
        if in_before:
            trajectory.centrality_before = weighted_degree(before.graph, stem)
            trajectory.centroid_distance_before = centroid_distance(before, stem)
        if in_after:
            trajectory.centrality_after = weighted_degree(after.graph, stem)
            trajectory.centroid_distance_after = centroid_distance(after, stem)
        trajectory.verdict = _verdict(trajectory)
        diff.focal_trajectories.append(trajectory)

    diff.emerging_terms = detect_emerging_terms(before, after)
    moved = [t.stem for t in diff.focal_trajectories if t.verdict != Verdict.STABLE]
    logger.info(
        f"Compared '{before.window_label}' -> '{after.window_label}': "
        f"{len(moved)} focal word(s) changed position, {len(diff.emerging_terms)} emerging term(s)"
    )
    return diff

"""
Layout Module
Kamada-Kawai spring embedding: Euclidean distances are pulled toward
graph-theoretic target distances by moving one node at a time, always the
node with the largest energy gradient, with a safeguarded 2-D Newton step.
Connected components are laid out independently and packed on a grid.
"""

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import networkx as nx
import numpy as np

from src.errors import PipelineError
from src.models import LayoutResult, SemanticGraph
from src.netbuild import to_networkx

logger = logging.getLogger(__name__)

SINGULAR_DET = 1e-12
MAX_HALVINGS = 20
COINCIDENT = 1e-12
PERTURBATION = 1e-9
JITTER = 0.1  # fraction of the angular slot


@dataclass(frozen=True, eq=False)
class TargetDistances:
    """Shortest-path distances (unit edges) and the spring constants they imply."""
    words: list[str]
    d: np.ndarray            # inf between components
    component: np.ndarray    # component index per word
    unit_length: np.ndarray  # ideal length per unit distance, per component
    l0: float = 1.0
    k: float = 1.0

    def index(self, word: str) -> int:
        return self.words.index(word)

    def distance(self, a: str, b: str) -> float:
        return float(self.d[self.index(a), self.index(b)])

    def connected(self) -> np.ndarray:
        """Boolean mask of distinct pairs within one component."""
        mask = np.isfinite(self.d)
        np.fill_diagonal(mask, False)
        return mask

    def lengths(self) -> np.ndarray:
        """Ideal Euclidean length per pair: L * d (0 where undefined)."""
        unit = self.unit_length[self.component][:, None]
        return np.where(self.connected(), unit * np.where(np.isfinite(self.d), self.d, 0.0), 0.0)

    def strengths(self) -> np.ndarray:
        """Spring strength per pair: K / d^2 (0 where undefined)."""
        mask = self.connected()
        safe = np.where(mask, self.d, 1.0)
        return np.where(mask, self.k / safe**2, 0.0)


def target_distances(g: SemanticGraph, l0: float = 1.0, k: float = 1.0) -> TargetDistances:
    """All-pairs shortest paths; L = l0 / (max distance within the component)."""
    if not g.nodes:
        raise PipelineError("layout", "cannot lay out an empty graph")

    words = g.stems()
    index = {w: i for i, w in enumerate(words)}
    graph = to_networkx(g)

    n = len(words)
    d = np.full((n, n), np.inf)
    component = np.zeros(n, dtype=np.int64)
    components = sorted(nx.connected_components(graph), key=lambda c: min(index[w] for w in c))
    unit_length = np.zeros(len(components))

    for c_idx, members in enumerate(components):
        longest = 0
        for source, lengths in nx.all_pairs_shortest_path_length(graph.subgraph(members)):
            i = index[source]
            component[i] = c_idx
            for target, hops in lengths.items():
                d[i, index[target]] = hops
                longest = max(longest, hops)
        unit_length[c_idx] = l0 / longest if longest else l0

    return TargetDistances(words=words, d=d, component=component, unit_length=unit_length, l0=l0, k=k)


def _as_array(positions, td: TargetDistances) -> np.ndarray:
    if isinstance(positions, Mapping):
        return np.array([positions[w] for w in td.words], dtype=np.float64)
    return np.asarray(positions, dtype=np.float64)


def _energy(pos: np.ndarray, lengths: np.ndarray, strengths: np.ndarray) -> float:
    iu = np.triu_indices(len(pos), k=1)
    diff = pos[iu[0]] - pos[iu[1]]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return float(np.sum(0.5 * strengths[iu] * (dist - lengths[iu]) ** 2))


def _gradient(pos: np.ndarray, lengths: np.ndarray, strengths: np.ndarray) -> np.ndarray:
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    ratio = np.divide(lengths, dist, out=np.zeros_like(dist), where=dist > 0)
    coef = strengths * (1.0 - ratio)
    return np.einsum("ij,ijk->ik", coef, diff)


def layout_energy(positions, td: TargetDistances) -> float:
    """Sum over connected pairs of 1/2 * k_ij * (|p_i - p_j| - L * d_ij)^2."""
    return _energy(_as_array(positions, td), td.lengths(), td.strengths())


def layout_gradient(positions, td: TargetDistances) -> np.ndarray:
    """Analytic dE/dp for every node, rows in `td.words` order."""
    return _gradient(_as_array(positions, td), td.lengths(), td.strengths())


class _ComponentSolver:
    """Node-at-a-time descent on one connected component."""

    def __init__(self, lengths: np.ndarray, strengths: np.ndarray, rng: np.random.Generator):
        self.l = lengths
        self.k = strengths
        self.rng = rng

    def local(self, pos: np.ndarray, m: int, p: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Energy terms involving node m at point p, with gradient and Hessian."""
        k, l = self.k[m], self.l[m]
        diff = p - pos
        diff[m] = 0.0
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        dist[m] = 1.0
        energy = 0.5 * float(np.sum(k * (dist - l) ** 2))
        grad = np.einsum("i,ij->j", k * (1.0 - l / dist), diff)
        inv3 = k * l / dist**3
        hxx = float(np.sum(k - inv3 * diff[:, 1] ** 2))
        hyy = float(np.sum(k - inv3 * diff[:, 0] ** 2))
        hxy = float(np.sum(inv3 * diff[:, 0] * diff[:, 1]))
        return energy, grad, np.array([[hxx, hxy], [hxy, hyy]])

    def local_energy(self, pos: np.ndarray, m: int, p: np.ndarray) -> float:
        diff = p - pos
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        terms = self.k[m] * (dist - self.l[m]) ** 2
        terms[m] = 0.0
        return 0.5 * float(np.sum(terms))

    def contribution(self, pos: np.ndarray, m: int, p: np.ndarray) -> np.ndarray:
        """Gradient term that node m placed at p adds to every other node."""
        diff = pos - p
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        ratio = np.divide(self.l[m], dist, out=np.zeros_like(dist), where=dist > 0)
        coef = self.k[m] * (1.0 - ratio)
        coef[m] = 0.0
        return coef[:, None] * diff

    def separate(self, pos: np.ndarray, m: int) -> bool:
        """Nudge node m off any coincident node; True if it moved."""
        diff = pos - pos[m]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        dist[m] = np.inf
        if dist.min() >= COINCIDENT:
            return False
        angle = self.rng.uniform(0.0, 2.0 * math.pi)
        pos[m] += PERTURBATION * np.array([math.cos(angle), math.sin(angle)])
        return True

    def step(self, pos: np.ndarray, m: int) -> Optional[tuple[np.ndarray, float, float]]:
        """Safeguarded Newton move for node m: (new point, old local E, new local E)."""
        energy, grad, hess = self.local(pos, m, pos[m])
        fallback = -grad / max(float(self.k[m].sum()), 1e-300)

        directions = []
        det = float(np.linalg.det(hess))
        if abs(det) >= SINGULAR_DET:
            newton = -np.linalg.solve(hess, grad)
            if float(newton @ grad) < 0:
                directions.append(newton)
        directions.append(fallback)

        for direction in directions:
            move = direction
            for _ in range(MAX_HALVINGS + 1):
                candidate = pos[m] + move
                new_energy = self.local_energy(pos, m, candidate)
                if new_energy < energy:
                    return candidate, energy, new_energy
                move = move / 2.0
        return None


def _layout_component(
    lengths: np.ndarray,
    strengths: np.ndarray,
    l0: float,
    rng: np.random.Generator,
    epsilon: float,
    max_iter: int,
    trace: Optional[list[float]],
) -> tuple[np.ndarray, float, float, int, bool]:
    n = len(lengths)
    radius = l0 * n / (2.0 * math.pi)
    slot = 2.0 * math.pi / n
    angles = slot * np.arange(n) + rng.uniform(-0.5, 0.5, size=n) * slot * JITTER
    pos = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])

    initial = _energy(pos, lengths, strengths)
    if n == 1:
        return pos, initial, initial, 0, True

    solver = _ComponentSolver(lengths, strengths, rng)
    grads = _gradient(pos, lengths, strengths)
    energy = initial
    if trace is not None:
        trace.append(energy)

    moves = 0
    converged = False
    while moves < max_iter:
        magnitudes = np.sqrt(np.einsum("ij,ij->i", grads, grads))
        m = int(np.argmax(magnitudes))
        if magnitudes[m] < epsilon:
            converged = True
            break

        if solver.separate(pos, m):
            grads = _gradient(pos, lengths, strengths)
            energy = _energy(pos, lengths, strengths)

        result = solver.step(pos, m)
        if result is None:
            logger.warning(f"Layout stalled after {moves} moves (gradient {magnitudes[m]:.3g})")
            break

        candidate, old_local, new_local = result
        old = pos[m].copy()
        pos[m] = candidate
        energy += new_local - old_local
        moves += 1
        if trace is not None:
            trace.append(energy)

        # other nodes: swap node m's old contribution for the new one
        new = solver.contribution(pos, m, candidate)
        grads += new - solver.contribution(pos, m, old)
        grads[m] = -new.sum(axis=0)
        if moves % (10 * n) == 0:
            grads = _gradient(pos, lengths, strengths)

    return pos, initial, _energy(pos, lengths, strengths), moves, converged


def _pack(blocks: list[np.ndarray], gap: float) -> list[np.ndarray]:
    """Center each component and place them on a non-overlapping grid."""
    if len(blocks) == 1:
        block = blocks[0]
        return [block - (block.min(axis=0) + block.max(axis=0)) / 2.0]

    centered = [b - (b.min(axis=0) + b.max(axis=0)) / 2.0 for b in blocks]
    cell = max(float(np.ptp(b, axis=0).max()) for b in centered) + gap
    columns = math.ceil(math.sqrt(len(blocks)))
    return [b + np.array([(i % columns) * cell, (i // columns) * cell]) for i, b in enumerate(centered)]


def _split_budget(sizes: np.ndarray, max_iter: int) -> np.ndarray:
    """Share `max_iter` node-moves among components in proportion to their size."""
    weights = np.where(sizes > 1, sizes, 0).astype(np.float64)
    if weights.sum() == 0:
        return np.zeros(len(sizes), dtype=np.int64)
    exact = max_iter * weights / weights.sum()
    shares = np.floor(exact).astype(np.int64)
    order = np.argsort(-(exact - shares), kind="stable")
    shares[order[: max_iter - int(shares.sum())]] += 1
    return shares


def kamada_kawai(
    g: SemanticGraph,
    td: Optional[TargetDistances] = None,
    seed: int = 42,
    epsilon: float = 1e-4,
    max_iter: Optional[int] = None,
    record_trace: bool = False,
) -> LayoutResult:
    """
    Lay out a semantic graph by Kamada-Kawai energy minimization.

    Args:
        g: The thresholded graph (no isolates).
        td: Target distances; computed with L0 = K = 1 when omitted.
        seed: Seed for the circular start jitter and coincidence nudges.
        epsilon: Stop once every node's gradient magnitude is below this.
        max_iter: Total node-move budget, split across components by size;
            moves a component leaves unused pass to the next one
            (default 1000 per node).
        record_trace: Keep the total energy after every accepted move.

    Returns:
        LayoutResult; `converged` is False when the budget ran out.
    """
    if epsilon <= 0:
        raise PipelineError("layout", "epsilon must be > 0")
    if max_iter is not None and max_iter < 1:
        raise PipelineError("layout", "max_iter must be >= 1")
    td = td or target_distances(g)

    lengths_all, strengths_all = td.lengths(), td.strengths()

    blocks, members, traces, initials, finals = [], [], [], [], []
    moves_total = 0
    converged_all = True
    sizes = np.bincount(td.component, minlength=len(td.unit_length))
    budgets = _split_budget(sizes, max_iter) if max_iter is not None else 1000 * sizes
    carry = 0

    for c_idx in range(len(td.unit_length)):
        idx = np.flatnonzero(td.component == c_idx)
        sub = np.ix_(idx, idx)
        rng = np.random.default_rng([seed, c_idx])
        budget = int(budgets[c_idx]) + carry

        component_trace: Optional[list[float]] = [] if record_trace else None
        pos, initial, final, moves, converged = _layout_component(
            lengths_all[sub], strengths_all[sub], td.l0, rng, epsilon, budget, component_trace,
        )
        blocks.append(pos)
        members.append(idx)
        traces.append(component_trace or [])
        initials.append(initial)
        finals.append(final)
        moves_total += moves
        carry = budget - moves
        converged_all &= converged
        if not converged:
            logger.warning(f"Component {c_idx} ({len(idx)} nodes) did not converge within {budget} moves")

    trace = []
    if record_trace:
        # total = finished components at final energy + current + pending at initial energy
        for c_idx, component_trace in enumerate(traces):
            done, pending = sum(finals[:c_idx]), sum(initials[c_idx + 1:])
            steps = component_trace if c_idx == 0 else component_trace[1:]
            trace.extend(done + e + pending for e in steps)

    initial_total, final_total = sum(initials), sum(finals)
    positions = np.zeros((len(td.words), 2))
    for idx, block in zip(members, _pack(blocks, gap=td.l0)):
        positions[idx] = block

    logger.info(
        f"Layout: {len(td.words)} nodes, {moves_total} moves, energy {initial_total:.4g} -> {final_total:.4g}"
        f"{'' if converged_all else ' (not converged)'}"
    )
    return LayoutResult(
        positions={w: (float(x), float(y)) for w, (x, y) in zip(td.words, positions)},
        initial_energy=initial_total,
        final_energy=final_total,
        iterations=moves_total,
        seed=seed,
        converged=converged_all,
        energy_trace=trace,
    )

"""
Network Construction Module
Derives the similarity cut-off, thresholds the matrix into a word network,
sizes nodes by log frequency and drops unconnected words.
"""

import logging
import math
from typing import Optional

import networkx as nx
import numpy as np

from src.errors import PipelineError
from src.models import GraphEdge, GraphNode, SemanticGraph, Vocabulary
from src.vectorspace import SimilarityMatrix

logger = logging.getLogger(__name__)

DEFAULT_SIZE_EPSILON = 0.1


def derive_threshold(c: SimilarityMatrix) -> float:
    """Mean of the strictly-lower-triangle cells (zeros included, diagonal not)."""
    n = len(c.words)
    if n < 2:
        raise PipelineError("netbuild", "threshold undefined for a matrix with fewer than 2 words")
    lower = c.cells[np.tril_indices(n, k=-1)]
    lower = lower[~np.isnan(lower)]
    if lower.size == 0:
        raise PipelineError("netbuild", "threshold undefined: every lower-triangle cell is undefined")
    return float(lower.sum() / lower.size)


def node_size(frequency: int, log_base: Optional[float] = None, epsilon: float = DEFAULT_SIZE_EPSILON) -> float:
    """log(frequency) in the configured base; frequency-1 words get `epsilon`."""
    if frequency < 2:
        return epsilon
    if log_base is None:
        return math.log(frequency)
    return math.log(frequency, log_base)


def build_graph(
    c: SimilarityMatrix,
    vocab: Vocabulary,
    threshold: float,
    derived_threshold: Optional[float] = None,
    log_base: Optional[float] = None,
    size_epsilon: float = DEFAULT_SIZE_EPSILON,
) -> SemanticGraph:
    """
    Keep word pairs with similarity >= threshold; remove isolates.

    Pairs with zero similarity (no shared document) never form an edge.

    Nodes follow the matrix word order; edges are stored once, endpoints in
    lexicographic order, sorted.
    """
    if not 0.0 <= threshold <= 1.0:
        raise PipelineError("netbuild", f"threshold {threshold} outside [0, 1]")

    words = c.words
    n = len(words)
    rows, cols = np.triu_indices(n, k=1)
    values = c.cells[rows, cols]
    keep = (values >= threshold) & (values > 0)  # NaN compares False

    edges = []
    degree = dict.fromkeys(words, 0)
    for i, j, weight in zip(rows[keep], cols[keep], values[keep]):
        a, b = sorted((words[i], words[j]))
        edges.append(GraphEdge(source=a, target=b, weight=float(weight)))
        degree[a] += 1
        degree[b] += 1
    edges.sort(key=lambda e: (e.source, e.target))

    isolates = [w for w in words if degree[w] == 0]
    if len(isolates) == n:
        raise PipelineError(
            "netbuild",
            "threshold too high; no edges",
            f"threshold {threshold:.4f} leaves every word unconnected; lower it or drop the override",
        )

    nodes = []
    for word in words:
        if degree[word] == 0:
            continue
        frequency = vocab.frequency(word)
        nodes.append(GraphNode(stem=word, frequency=frequency, size=node_size(frequency, log_base, size_epsilon)))

    logger.info(
        f"Graph at threshold {threshold:.4f}: {len(nodes)} nodes, {len(edges)} edges, {len(isolates)} isolates removed"
    )
    return SemanticGraph(
        nodes=nodes,
        edges=edges,
        threshold_used=threshold,
        derived_threshold=derived_threshold,
        isolates=isolates,
    )


def weighted_degree(g: SemanticGraph, stem: str) -> float:
    """Sum of incident edge weights divided by (node count - 1)."""
    if not g.has_node(stem):
        raise PipelineError("netbuild", f"unknown node '{stem}'")
    if len(g.nodes) < 2:
        return 0.0
    total = sum(e.weight for e in g.edges if stem in (e.source, e.target))
    return total / (len(g.nodes) - 1)


def to_networkx(g: SemanticGraph) -> nx.Graph:
    """Undirected networkx view with node frequency/size and edge weights."""
    graph = nx.Graph()
    for node in g.nodes:
        graph.add_node(node.stem, frequency=node.frequency, size=node.size)
    for edge in g.edges:
        graph.add_edge(edge.source, edge.target, weight=edge.weight)
    return graph

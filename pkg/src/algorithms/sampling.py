"""
Batched edge-failure sampling.

A batch of failure samples is labelled in one call: the surviving graphs
are laid out as a block-diagonal sparse matrix and passed to
scipy's connected_components once.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from src.algorithms.multigraph import MultiGraph
from src.errors import InfeasibleParameterError

logger = logging.getLogger(__name__)

BATCH_SIZE = 2048


def sample_survivors(
    graph: MultiGraph, p: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """
    Surviving multiplicity of every adjacent pair, for ``size`` samples.

    Each parallel edge fails independently with probability p, so a pair
    of multiplicity k keeps Binomial(k, 1 - p) edges. Shape: (size, pairs).
    """
    if not 0 <= p <= 1:
        raise InfeasibleParameterError(f"p must lie in [0, 1], got {p}")
    _, _, mults = graph.pairs()
    return rng.binomial(mults, 1.0 - p, size=(size, len(mults)))


def batch_components(graph: MultiGraph, survivors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Component count and vertex labels for every sample in a batch.

    Returns ``(counts, labels)`` with shapes (size,) and (size, n); labels
    are only meaningful for equality within a row.
    """
    rows, cols, _ = graph.pairs()
    n = graph.n
    size = survivors.shape[0]
    alive_sample, alive_pair = np.nonzero(survivors > 0)
    offsets = alive_sample * n
    block = coo_matrix(
        (
            np.ones(len(alive_pair), dtype=np.int8),
            (offsets + rows[alive_pair], offsets + cols[alive_pair]),
        ),
        shape=(size * n, size * n),
    )
    _, flat_labels = connected_components(block, directed=False)
    labels = flat_labels.reshape(size, n)
    ordered = np.sort(labels, axis=1)
    counts = 1 + np.count_nonzero(np.diff(ordered, axis=1), axis=1)
    return counts, labels


def count_disconnected(
    graph: MultiGraph, p: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Boolean vector marking which of ``size`` fresh samples disconnect G."""
    counts, _ = batch_components(graph, sample_survivors(graph, p, rng, size))
    return counts > 1


def single_sample_components(graph: MultiGraph, survivors: np.ndarray) -> Tuple[int, np.ndarray]:
    """Component count and labels for one survivor vector."""
    counts, labels = batch_components(graph, survivors.reshape(1, -1))
    return int(counts[0]), labels[0]

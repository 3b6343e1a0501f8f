"""
Contraction Algorithm and Contraction Process.

Both contract uniformly random edges and record the edge count M_r at
every vertex count r visited. The Contraction Process never selects an
edge from its blocked set L and ends in the bottom state when only blocked
edges remain.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.algorithms.multigraph import (
    AlphaLike,
    ContractionState,
    MultiGraph,
    ceil_two_alpha,
    exact,
    min_cut,
)
from src.algorithms.workers import run_parallel
from src.errors import (
    DisconnectedGraphError,
    InfeasibleParameterError,
    InvariantViolation,
)
from src.models import Cut, PotentialS, Trajectory
from src.rng import Stream, derive_rng

logger = logging.getLogger(__name__)

EdgeSpec = Union[Sequence[Tuple[int, int]], np.ndarray]


def _check_degree_floor(state: ContractionState, c: int) -> None:
    """Every contraction-subgraph keeps minimum degree >= c, hence M_r >= r*c/2."""
    if state.n >= 2 and state.min_degree() < c:
        raise InvariantViolation(
            f"vertex degree {state.min_degree()} fell below min cut {c} at r={state.n}"
        )
    if 2 * state.m < state.n * c:
        raise InvariantViolation(f"M_{state.n}={state.m} is below r*c/2")


def _blocked_matrix(graph: MultiGraph, blocked: EdgeSpec) -> np.ndarray:
    """Turns a list of current-vertex pairs into a multiplicity matrix."""
    if isinstance(blocked, np.ndarray):
        return np.array(blocked, dtype=np.int64)
    matrix = np.zeros_like(graph.mult)
    for u, v in blocked:
        matrix[u - 1, v - 1] += 1
        matrix[v - 1, u - 1] += 1
    return matrix


def run_ca(
    graph: MultiGraph,
    alpha: AlphaLike,
    seed: int,
    *,
    key: Tuple[int, ...] = (),
    c: Optional[int] = None,
) -> Trajectory:
    """
    One run of the Contraction Algorithm.

    Contracts from n down to ceil(2*alpha) vertices, then selects one of the
    remaining graph's cuts uniformly. When n <= ceil(2*alpha) no contraction
    happens and the cut is drawn on G itself.

    Args:
        graph: connected input graph.
        alpha: cut-size parameter, at least 1.
        seed: master seed; the stream is (seed, CONTRACTION, *key).
        key: extra stream indices, e.g. a trial number.
        c: min-cut weight; when given, the degree floor is asserted at
            every stage.
    """
    stop = ceil_two_alpha(alpha)
    if not graph.is_connected():
        raise DisconnectedGraphError("graph is not connected")
    rng = derive_rng(seed, Stream.CONTRACTION, *key)
    state = ContractionState(graph)
    counts: Dict[int, int] = {state.n: state.m}
    history: List[Tuple[int, int]] = []
    while state.n > stop:
        i, j = state.pick_edge(rng)
        history.append(state.edge_label(i, j))
        state.contract(i, j)
        counts[state.n] = state.m
        if c is not None:
            _check_degree_floor(state, c)
    selected = state.draw_cut(rng)
    return Trajectory(
        seed=seed,
        alpha=float(exact(alpha)),
        n=graph.n,
        edges=tuple(history),
        edge_counts=counts,
        stop=state.n,
        selected=selected,
    )


def run_cp(
    graph: MultiGraph,
    blocked: EdgeSpec,
    stop: int,
    seed: int,
    *,
    key: Tuple[int, ...] = (),
) -> Trajectory:
    """
    One run of the Contraction Process CP(G, L).

    ``blocked`` is the edge multiset L, either as current-vertex pairs or as
    a multiplicity matrix. Blocked edges count towards M_r but are never
    selected; blocked edges between merged vertices vanish like any loop.
    """
    if stop < 1:
        raise InfeasibleParameterError(f"stop must be at least 1, got {stop}")
    rng = derive_rng(seed, Stream.CONTRACTION, *key)
    state = ContractionState(graph, blocked=_blocked_matrix(graph, blocked))
    counts: Dict[int, int] = {state.n: state.m}
    history: List[Tuple[int, int]] = []
    bottom = False
    while state.n > stop:
        if state.free_m == 0:
            bottom = True
            break
        i, j = state.pick_edge(rng)
        history.append(state.edge_label(i, j))
        state.contract(i, j)
        counts[state.n] = state.m
    return Trajectory(
        seed=seed,
        alpha=stop / 2,
        n=graph.n,
        edges=tuple(history),
        edge_counts=counts,
        stop=state.n,
        bottom=bottom,
    )


def potential(traj: Trajectory, c: int) -> PotentialS:
    """S_i = sum over r = i+1..n of c / M_r, for every recorded i."""
    values: Dict[int, float] = {}
    terms: List[float] = []
    for i in range(traj.n, traj.stop - 1, -1):
        values[i] = math.fsum(terms)
        terms.append(c / traj.edge_counts[i])
    return PotentialS(stop=traj.stop, n=traj.n, values=values)


def survival_frequency(
    graph: MultiGraph,
    cut: Cut,
    alpha: AlphaLike,
    trials: int,
    seed: int,
    *,
    threads: int = 1,
) -> float:
    """Fraction of Contraction Algorithm runs whose selected cut equals ``cut``."""
    if trials <= 0:
        raise InfeasibleParameterError("trials must be positive")
    c, _ = min_cut(graph)

    def count_hits(block: range) -> int:
        hits = 0
        for t in block:
            traj = run_ca(graph, alpha, seed, key=(Stream.SURVIVAL, t), c=c)
            if traj.selected is not None and traj.selected.shore == cut.shore:
                hits += 1
        return hits

    block_size = 256
    blocks = [range(s, min(s + block_size, trials)) for s in range(0, trials, block_size)]
    hits = sum(run_parallel(count_hits, blocks, threads))
    logger.debug("Cut survived %d of %d contraction runs", hits, trials)
    return hits / trials

"""
Graph families used by tests, benchmarks and the CLI ``--family`` flag.
"""

import inspect
from typing import Callable, Dict, List

import numpy as np

from src.algorithms.multigraph import MultiGraph
from src.errors import InfeasibleParameterError


def two_vertex_graph(mult: int = 1) -> MultiGraph:
    """Two vertices joined by ``mult`` parallel edges."""
    if mult < 1:
        raise InfeasibleParameterError("multiplicity must be positive")
    return MultiGraph.from_edges(2, [(1, 2, mult)])


def cycle_graph(n: int, mult: int = 1) -> MultiGraph:
    """The cycle C_n with every edge of multiplicity ``mult``."""
    if n < 3:
        raise InfeasibleParameterError("a cycle needs at least 3 vertices")
    return MultiGraph.from_edges(n, [(i, i % n + 1, mult) for i in range(1, n + 1)])


def complete_graph(n: int, mult: int = 1) -> MultiGraph:
    """The complete graph K_n."""
    if n < 2:
        raise InfeasibleParameterError("K_n needs at least 2 vertices")
    mult_matrix = np.full((n, n), mult, dtype=np.int64)
    np.fill_diagonal(mult_matrix, 0)
    return MultiGraph(mult_matrix)


def bridge_graph(n: int) -> MultiGraph:
    """The path on n vertices; every edge is a bridge."""
    if n < 2:
        raise InfeasibleParameterError("a path needs at least 2 vertices")
    return MultiGraph.from_edges(n, [(i, i + 1, 1) for i in range(1, n)])


def dumbbell_graph(k: int = 3, bridge: int = 1) -> MultiGraph:
    """Two copies of K_k joined between vertices k and k+1 by ``bridge`` edges."""
    if k < 2:
        raise InfeasibleParameterError("each bell needs at least 2 vertices")
    edges = []
    for offset in (0, k):
        for u in range(1, k + 1):
            for v in range(u + 1, k + 1):
                edges.append((u + offset, v + offset, 1))
    edges.append((k, k + 1, bridge))
    return MultiGraph.from_edges(2 * k, edges)


def make_odd_cycle_graph(n: int, c: int) -> MultiGraph:
    """
    Cycle of edge bundles with minimum cut exactly c.

    Adjacent vertices are joined by (c+1)/2 parallel edges, except the
    closing pair (n, 1) which gets (c-1)/2.
    """
    if c < 3 or c % 2 == 0:
        raise InfeasibleParameterError(f"c must be odd and at least 3, got {c}")
    if n < 3:
        raise InfeasibleParameterError("the cycle needs at least 3 vertices")
    heavy, light = (c + 1) // 2, (c - 1) // 2
    edges = [(i, i + 1, heavy) for i in range(1, n)]
    edges.append((n, 1, light))
    return MultiGraph.from_edges(n, edges)


FAMILIES: Dict[str, Callable[..., MultiGraph]] = {
    "k2": two_vertex_graph,
    "complete": complete_graph,
    "cycle": cycle_graph,
    "path": bridge_graph,
    "dumbbell": dumbbell_graph,
    "odd-cycle": make_odd_cycle_graph,
}


def build_family(spec: str) -> MultiGraph:
    """Builds a graph from ``name:arg1,arg2`` (for example ``odd-cycle:5,3``)."""
    name, _, raw_args = spec.partition(":")
    if name not in FAMILIES:
        raise InfeasibleParameterError(
            f"unknown family {name!r}; choose from {', '.join(sorted(FAMILIES))}"
        )
    try:
        args: List[int] = [int(a) for a in raw_args.split(",") if a.strip()]
    except ValueError as e:
        raise InfeasibleParameterError(f"family arguments must be integers: {raw_args!r}") from e
    builder = FAMILIES[name]
    try:
        inspect.signature(builder).bind(*args)
    except TypeError as e:
        raise InfeasibleParameterError(
            f"wrong number of arguments for family {name!r}: {raw_args!r}"
        ) from e
    return builder(*args)


def desk_corpus() -> Dict[str, MultiGraph]:
    """Small graphs every exhaustive check runs over."""
    return {
        "k2x1": two_vertex_graph(1),
        "k2x2": two_vertex_graph(2),
        "k2x3": two_vertex_graph(3),
        "k3": complete_graph(3),
        "k4": complete_graph(4),
        "c4": cycle_graph(4),
        "c5": cycle_graph(5),
        "c6": cycle_graph(6),
        "odd5x3": make_odd_cycle_graph(5, 3),
        "dumbbell": dumbbell_graph(3),
    }

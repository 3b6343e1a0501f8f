"""
Multigraph representation and contraction primitives.

A graph is a symmetric int64 multiplicity matrix plus, for every current
vertex, the set of original vertices merged into it. Public functions take
1-indexed vertices; the matrix itself is 0-indexed.
"""

import logging
import math
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from src.errors import (
    DisconnectedGraphError,
    InfeasibleParameterError,
    InvariantViolation,
)
from src.models import Cut

logger = logging.getLogger(__name__)

MAX_MULTIPLICITY = 2**63 - 1

AlphaLike = Union[float, int, Fraction, str]


def exact(value: AlphaLike) -> Fraction:
    """Rational value of a user-supplied number, read as its shortest decimal form."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def ceil_two_alpha(alpha: AlphaLike) -> int:
    """Exact ceiling of 2·alpha; accepts floats, Fractions and "p/q" strings."""
    value = exact(alpha)
    if value < 1:
        raise InfeasibleParameterError(f"alpha must be at least 1, got {alpha}")
    return math.ceil(2 * value)


class MultiGraph:
    """
    Undirected loopless multigraph on current vertices 1..n.

    ``groups[i]`` holds the original vertices contracted into current vertex
    i + 1. An uncontracted graph has singleton groups.
    """

    __slots__ = ("mult", "groups", "m", "_pairs")

    def __init__(
        self, mult: np.ndarray, groups: Optional[Sequence[FrozenSet[int]]] = None
    ) -> None:
        matrix = np.array(mult, dtype=np.int64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InfeasibleParameterError("multiplicity matrix must be square")
        if not np.array_equal(matrix, matrix.T):
            raise InfeasibleParameterError("multiplicity matrix must be symmetric")
        if np.any(np.diag(matrix) != 0):
            raise InfeasibleParameterError("self-loops are not allowed")
        if np.any(matrix < 0):
            raise InfeasibleParameterError("multiplicities must be non-negative")
        matrix.setflags(write=False)
        self.mult = matrix
        n = matrix.shape[0]
        if groups is None:
            self.groups: Tuple[FrozenSet[int], ...] = tuple(
                frozenset({v}) for v in range(1, n + 1)
            )
        else:
            if len(groups) != n:
                raise InfeasibleParameterError("one group per vertex is required")
            self.groups = tuple(frozenset(g) for g in groups)
        self.m = int(np.triu(matrix, 1).sum())
        self._pairs: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int, int]]) -> "MultiGraph":
        """Builds a graph from (u, v, multiplicity) triples, 1-indexed."""
        matrix = np.zeros((n, n), dtype=np.int64)
        for u, v, k in edges:
            if not (1 <= u <= n and 1 <= v <= n) or u == v:
                raise InfeasibleParameterError(f"invalid edge ({u}, {v}) for n={n}")
            matrix[u - 1, v - 1] += k
            matrix[v - 1, u - 1] += k
        return cls(matrix)

    @property
    def n(self) -> int:
        """Current vertex count."""
        return int(self.mult.shape[0])

    @property
    def orig_n(self) -> int:
        """Vertex count of the original graph."""
        return sum(len(g) for g in self.groups)

    def multiplicity(self, u: int, v: int) -> int:
        """Number of parallel edges between current vertices u and v."""
        return int(self.mult[u - 1, v - 1])

    def degree(self, v: int) -> int:
        """Degree of current vertex v."""
        return int(self.mult[v - 1].sum())

    def edges(self) -> List[Tuple[int, int, int]]:
        """(u, v, multiplicity) for every adjacent pair, u < v, 1-indexed."""
        rows, cols, mults = self.pairs()
        return [(int(u) + 1, int(v) + 1, int(k)) for u, v, k in zip(rows, cols, mults)]

    def pairs(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """0-indexed (rows, cols, multiplicities) of the upper triangle."""
        if self._pairs is None:
            rows, cols = np.nonzero(np.triu(self.mult, 1))
            self._pairs = (rows, cols, self.mult[rows, cols].copy())
        return self._pairs

    def is_connected(self) -> bool:
        """True when the graph has a single connected component."""
        if self.n <= 1:
            return True
        count, _ = connected_components(coo_matrix(self.mult), directed=False)
        return bool(count == 1)

    def vertex_of(self, orig: int) -> int:
        """Current 1-indexed vertex whose group contains original vertex ``orig``."""
        for index, group in enumerate(self.groups):
            if orig in group:
                return index + 1
        raise InfeasibleParameterError(f"vertex {orig} is not in the graph")

    def representative(self, v: int) -> int:
        """Smallest original vertex merged into current vertex v."""
        return min(self.groups[v - 1])

    def side_mask(self, shore: Iterable[int]) -> np.ndarray:
        """
        Boolean mask over current vertices for an original-vertex shore.

        Raises when the shore splits a contracted vertex.
        """
        shore_set = frozenset(shore)
        mask = np.zeros(self.n, dtype=bool)
        for index, group in enumerate(self.groups):
            inside = group & shore_set
            if inside and inside != group:
                raise InfeasibleParameterError(
                    "shore splits a contracted vertex; it is not a cut of this graph"
                )
            mask[index] = bool(inside)
        return mask

    def respects(self, shore: Iterable[int]) -> bool:
        """True when the shore is a union of current groups."""
        shore_set = frozenset(shore)
        return all(not (g & shore_set) or g <= shore_set for g in self.groups)

    def to_networkx(self) -> nx.Graph:
        """Weighted simple graph with multiplicities as ``weight``."""
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.n + 1))
        for u, v, k in self.edges():
            graph.add_edge(u, v, weight=k)
        return graph

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, m={self.m})"


def merge_matrix(matrix: np.ndarray, i: int, j: int) -> np.ndarray:
    """Merges 0-indexed row/column j into i, drops the loop and removes j."""
    merged = np.array(matrix, dtype=np.int64)
    merged[i, :] += merged[j, :]
    merged[:, i] += merged[:, j]
    merged[i, i] = 0
    keep = [k for k in range(merged.shape[0]) if k != j]
    return merged[np.ix_(keep, keep)]


def contract_edge(graph: MultiGraph, u: int, v: int) -> MultiGraph:
    """
    Contracts the pair (u, v) of current vertices.

    All parallel u-v edges become loops and are dropped; edges from u or v
    to a third vertex merge. The merged vertex keeps the smaller index.
    """
    if u == v or graph.multiplicity(u, v) == 0:
        raise InfeasibleParameterError(f"no edge between {u} and {v}")
    i, j = sorted((u - 1, v - 1))
    groups = list(graph.groups)
    groups[i] = groups[i] | groups[j]
    del groups[j]
    return MultiGraph(merge_matrix(graph.mult, i, j), groups)


def contract_set(graph: MultiGraph, edges: Sequence[Tuple[int, int]]) -> MultiGraph:
    """
    Contracts a sequence of original-vertex edges in order.

    An edge whose endpoints already share a group is skipped: it became a
    loop when an earlier edge was contracted.
    """
    current = graph
    for u, v in edges:
        x, y = current.vertex_of(u), current.vertex_of(v)
        if x == y:
            continue
        if current.multiplicity(x, y) == 0:
            raise InfeasibleParameterError(f"edge ({u}, {v}) is not present in the graph")
        current = contract_edge(current, x, y)
    return current


def canonical_shore(shore: Iterable[int], n: int) -> FrozenSet[int]:
    """Returns whichever side of the bipartition contains vertex 1."""
    shore_set = frozenset(shore)
    everything = frozenset(range(1, n + 1))
    if not shore_set or shore_set == everything or not shore_set <= everything:
        raise InfeasibleParameterError("a shore must be a non-empty proper vertex subset")
    return shore_set if 1 in shore_set else everything - shore_set


def cut_weight(graph: MultiGraph, shore: Iterable[int]) -> int:
    """Number of edges crossing the bipartition given by an original-vertex shore."""
    mask = graph.side_mask(canonical_shore(shore, graph.orig_n))
    return int(graph.mult[np.ix_(mask, ~mask)].sum())


def make_cut(graph: MultiGraph, shore: Iterable[int]) -> Cut:
    """Canonical Cut for a shore of the original vertices."""
    canonical = canonical_shore(shore, graph.orig_n)
    return Cut(canonical, cut_weight(graph, canonical))


def crossing_matrix(graph: MultiGraph, shore: Iterable[int]) -> np.ndarray:
    """Multiplicity matrix restricted to the edges crossing the cut."""
    mask = graph.side_mask(shore)
    crossing = np.zeros_like(graph.mult)
    crossing[np.ix_(mask, ~mask)] = graph.mult[np.ix_(mask, ~mask)]
    crossing[np.ix_(~mask, mask)] = graph.mult[np.ix_(~mask, mask)]
    return crossing


def min_cut(graph: MultiGraph) -> Tuple[int, Cut]:
    """
    Deterministic minimum cut (Stoer-Wagner on multiplicity weights).

    Returns the weight c and one cut achieving it.
    """
    if graph.n < 2:
        raise InfeasibleParameterError("a minimum cut needs at least two vertices")
    if not graph.is_connected():
        raise DisconnectedGraphError("graph is not connected")
    value, (part, _) = nx.stoer_wagner(graph.to_networkx())
    shore = frozenset().union(*(graph.groups[v - 1] for v in part))
    cut = make_cut(graph, shore)
    if cut.weight != int(value):
        raise InvariantViolation(f"min cut weight mismatch: {cut.weight} != {value}")
    return cut.weight, cut


def components_after_removal(
    graph: MultiGraph, removed: Union[Sequence[Tuple[int, int]], np.ndarray]
) -> Tuple[int, Dict[int, int]]:
    """
    Connected components after deleting edges.

    ``removed`` is either a list of current-vertex pairs (each deletes one
    parallel copy) or a full matrix of surviving multiplicities. Returns the
    component count and a vertex -> component label map.
    """
    if isinstance(removed, np.ndarray):
        survivors = np.asarray(removed, dtype=np.int64)
        if survivors.shape != graph.mult.shape or np.any(survivors > graph.mult):
            raise InfeasibleParameterError("survivor matrix does not fit the graph")
    else:
        survivors = np.array(graph.mult, dtype=np.int64)
        for u, v in removed:
            if survivors[u - 1, v - 1] <= 0:
                raise InfeasibleParameterError(f"edge ({u}, {v}) removed more often than present")
            survivors[u - 1, v - 1] -= 1
            survivors[v - 1, u - 1] -= 1
    count, labels = connected_components(coo_matrix(survivors), directed=False)
    return int(count), {v + 1: int(label) for v, label in enumerate(labels)}


class ContractionState:
    """
    Mutable working copy used while contracting.

    Dead vertices keep their rows zeroed so indices stay stable. An optional
    ``blocked`` matrix marks edges that may not be selected (the set L of the
    Contraction Process); blocked edges still count towards ``m``.
    """

    # pylint: disable=too-many-instance-attributes

    def __init__(self, graph: MultiGraph, blocked: Optional[np.ndarray] = None) -> None:
        self.mult = np.array(graph.mult, dtype=np.int64)
        self.deg = self.mult.sum(axis=1)
        self.m = graph.m
        self.groups: List[FrozenSet[int]] = list(graph.groups)
        self.alive: List[int] = list(range(graph.n))
        if blocked is not None:
            block = np.array(blocked, dtype=np.int64)
            if block.shape != self.mult.shape or np.any(block > self.mult) or np.any(block < 0):
                raise InfeasibleParameterError("blocked edges must be a sub-multiset of the graph")
            self.blocked: Optional[np.ndarray] = block
            self.blocked_deg: Optional[np.ndarray] = block.sum(axis=1)
            self.blocked_m = int(np.triu(block, 1).sum())
        else:
            self.blocked = None
            self.blocked_deg = None
            self.blocked_m = 0

    @property
    def n(self) -> int:
        """Number of live vertices."""
        return len(self.alive)

    @property
    def free_m(self) -> int:
        """Edges available for selection."""
        return self.m - self.blocked_m

    def pick_edge(self, rng: np.random.Generator) -> Tuple[int, int]:
        """Draws one selectable edge uniformly; returns its 0-indexed endpoints."""
        if self.free_m <= 0:
            raise InvariantViolation("no selectable edge left")
        free_deg = self.deg if self.blocked_deg is None else self.deg - self.blocked_deg
        ticket = int(rng.integers(0, 2 * self.free_m))
        cumulative = np.cumsum(free_deg)
        i = int(np.searchsorted(cumulative, ticket, side="right"))
        offset = ticket - int(cumulative[i] - free_deg[i])
        row = self.mult[i] if self.blocked is None else self.mult[i] - self.blocked[i]
        j = int(np.searchsorted(np.cumsum(row), offset, side="right"))
        return i, j

    def edge_label(self, i: int, j: int) -> Tuple[int, int]:
        """Identifies a contracted pair by its groups' smallest original vertices."""
        a, b = min(self.groups[i]), min(self.groups[j])
        return (a, b) if a < b else (b, a)

    def contract(self, i: int, j: int) -> None:
        """Merges vertex j into vertex i."""
        if i == j or self.mult[i, j] == 0:
            raise InvariantViolation(f"cannot contract non-adjacent pair ({i}, {j})")
        weight = int(self.mult[i, j])
        self._merge(self.mult, i, j)
        self.deg[i] = self.deg[i] + self.deg[j] - 2 * weight
        self.deg[j] = 0
        self.m -= weight
        if self.blocked is not None and self.blocked_deg is not None:
            blocked_weight = int(self.blocked[i, j])
            self._merge(self.blocked, i, j)
            self.blocked_deg[i] = self.blocked_deg[i] + self.blocked_deg[j] - 2 * blocked_weight
            self.blocked_deg[j] = 0
            self.blocked_m -= blocked_weight
        self.groups[i] = self.groups[i] | self.groups[j]
        self.groups[j] = frozenset()
        self.alive.remove(j)

    @staticmethod
    def _merge(matrix: np.ndarray, i: int, j: int) -> None:
        matrix[i, :] += matrix[j, :]
        matrix[:, i] += matrix[:, j]
        matrix[i, i] = 0
        matrix[j, :] = 0
        matrix[:, j] = 0

    def min_degree(self) -> int:
        """Smallest degree among live vertices."""
        return int(self.deg[self.alive].min())

    def freeze(self) -> MultiGraph:
        """Compacts the live vertices into an immutable MultiGraph."""
        alive = self.alive
        return MultiGraph(self.mult[np.ix_(alive, alive)], [self.groups[i] for i in alive])

    def draw_cut(self, rng: np.random.Generator) -> Cut:
        """
        Draws one of the 2^(k-1) - 1 cuts of the live graph uniformly.

        The vertex holding original vertex 1 stays on the shore; each other
        vertex gets a random bit, and the all-zero draw is rejected.
        """
        k = self.n
        if k < 2:
            raise InvariantViolation("a single vertex has no cuts")
        holder = next(i for i in self.alive if 1 in self.groups[i])
        others = [i for i in self.alive if i != holder]
        while True:
            bits = rng.integers(0, 2, size=k - 1)
            if bits.any():
                break
        shore_idx = [holder] + [i for i, bit in zip(others, bits) if bit == 0]
        away_idx = [i for i, bit in zip(others, bits) if bit == 1]
        shore = frozenset().union(*(self.groups[i] for i in shore_idx))
        weight = int(self.mult[np.ix_(shore_idx, away_idx)].sum())
        return Cut(shore, weight)


def draw_uniform_cut(graph: MultiGraph, rng: np.random.Generator) -> Cut:
    """Uniform cut of a (small, contracted) graph."""
    return ContractionState(graph).draw_cut(rng)


def contract_to(graph: MultiGraph, target: int, rng: np.random.Generator) -> MultiGraph:
    """Contracts uniformly random edges until ``target`` vertices remain."""
    state = ContractionState(graph)
    while state.n > target:
        state.contract(*state.pick_edge(rng))
    return state.freeze()

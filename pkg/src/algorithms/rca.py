"""
Recursive Contraction Algorithm.

A run is a tree of contraction runs sharing prefixes: every internal node
hands its already-contracted graph to each child, the child contracts it
further with its own random stream, and every leaf emits one uniformly
drawn cut as a compact record. Two schemes are provided:

- ``rca``: 4 children per node, each halving the vertex count;
- ``rca2``: 2 children per node, each shrinking by a factor 2^(2/5).

Every node's stream is derived from (seed, scheme, run, *tree path), so a
record's pointer is enough to replay the exact contractions and final draw.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from src.algorithms.cutstore import (
    CutCollection,
    HashTable,
    build_collection,
    cut_id,
)
from src.algorithms.multigraph import (
    AlphaLike,
    MultiGraph,
    ceil_two_alpha,
    contract_to,
    draw_uniform_cut,
    exact,
    min_cut,
)
from src.algorithms.workers import run_parallel
from src.errors import (
    DisconnectedGraphError,
    InfeasibleParameterError,
    ReconstructionError,
)
from src.models import Cut, CutPointer, CutRecord, RcaRun
from src.rng import Stream, derive_rng

logger = logging.getLogger(__name__)

RCA2_SHRINK = 2.0 ** (-2.0 / 5.0)

# Target failure probability used to size the number of enumeration runs.
ENUMERATION_MISS_RATE = 1e-3


@dataclass(frozen=True)
class _Scheme:
    name: str
    stream: Stream
    branching: int
    target: Callable[[int, int], int]


def _halving_target(r: int, leaf: int) -> int:
    return max(math.ceil(r / 2), leaf)


def _rca2_target(r: int, leaf: int) -> int:
    return min(r - 1, max(math.ceil(r * RCA2_SHRINK), leaf))


SCHEMES: Dict[str, _Scheme] = {
    "rca": _Scheme("rca", Stream.RCA, 4, _halving_target),
    "rca2": _Scheme("rca2", Stream.RCA2, 2, _rca2_target),
}


def _cut_total(n: int) -> float:
    """2^(n-1) - 1 as a float, saturating for very large n."""
    return 2.0 ** min(n - 1, 1000) - 1.0


def default_table(graph: MultiGraph, alpha: AlphaLike, seed: int, phi: float = 3.0) -> HashTable:
    """Hash table sized for the alpha-cut count bound min(n^(2 alpha), 2^(n-1) - 1)."""
    n = graph.orig_n
    capacity = min(float(n) ** (2 * float(exact(alpha))), _cut_total(n))
    return HashTable.create(n, int(max(2.0, capacity)), seed, phi)


def tree_depth(scheme: str, n: int, alpha: AlphaLike) -> int:
    """Number of contraction levels below the root for a graph of n vertices."""
    rule = SCHEMES[scheme]
    leaf = ceil_two_alpha(alpha)
    depth = 0
    while n > leaf:
        n = rule.target(n, leaf)
        depth += 1
    return depth


def tree_node_count(scheme: str, n: int, alpha: AlphaLike) -> int:
    """Nodes in one run's tree. The tree shape depends only on n and alpha."""
    rule = SCHEMES[scheme]
    leaf = ceil_two_alpha(alpha)
    count = width = 1
    while n > leaf:
        n = rule.target(n, leaf)
        width *= rule.branching
        count += width
    return count


def _run_tree(
    graph: MultiGraph,
    alpha: AlphaLike,
    seed: int,
    run: int,
    scheme: _Scheme,
    branching: int,
    table: HashTable,
) -> RcaRun:
    # pylint: disable=too-many-arguments,too-many-positional-arguments
    if not graph.is_connected():
        raise DisconnectedGraphError("graph is not connected")
    if branching < 1:
        raise InfeasibleParameterError(f"branching must be positive, got {branching}")
    leaf = ceil_two_alpha(alpha)
    result = RcaRun(
        seed=seed,
        alpha=float(exact(alpha)),
        scheme=scheme.name,
        run=run,
        depth_limit=max(0, int(math.floor(math.log2(graph.n / leaf)))) if graph.n > leaf else 0,
        depth=0,
        node_count=0,
    )

    def visit(node: MultiGraph, path: Tuple[int, ...]) -> None:
        result.node_count += 1
        result.depth = max(result.depth, len(path))
        rng = derive_rng(seed, scheme.stream, run, *path)
        if path:
            node = contract_to(node, scheme.target(node.n, leaf), rng)
        if node.n <= leaf:
            cut = draw_uniform_cut(node, rng)
            pointer = CutPointer(
                seed=seed, run=run, path=path, scheme=scheme.name, alpha=float(exact(alpha))
            )
            result.emitted.append(
                CutRecord(id=cut_id(table, cut.shore), weight=cut.weight, pointer=pointer)
            )
            return
        for child in range(branching):
            visit(node, path + (child,))

    visit(graph, ())
    logger.debug(
        "%s run %d: %d nodes, depth %d, %d leaves",
        scheme.name,
        run,
        result.node_count,
        result.depth,
        len(result.emitted),
    )
    return result


def run_rca(
    graph: MultiGraph,
    alpha: AlphaLike,
    seed: int,
    *,
    run: int = 0,
    table: Optional[HashTable] = None,
    branching: int = 4,
) -> RcaRun:
    """
    One Recursive Contraction Algorithm run.

    Each child contracts its parent's graph to max(ceil(r/2), ceil(2 alpha))
    vertices; nodes at ceil(2 alpha) vertices or fewer are leaves. With
    ``branching=1`` a run has the same cut law as the Contraction Algorithm.
    """
    if table is None:
        table = default_table(graph, alpha, seed)
    return _run_tree(graph, alpha, seed, run, SCHEMES["rca"], branching, table)


def run_rca2(
    graph: MultiGraph,
    alpha: AlphaLike,
    seed: int,
    *,
    run: int = 0,
    table: Optional[HashTable] = None,
) -> RcaRun:
    """
    One RCA2 run: branching 2, each child shrinks by 2^(2/5).

    The target is max(ceil(r * 2^(-2/5)), ceil(2 alpha)), capped at r - 1.
    Requires 3/2 <= alpha <= sqrt(n).
    """
    value = exact(alpha)
    if value < exact("3/2") or value * value > graph.n:
        raise InfeasibleParameterError(
            f"RCA2 needs 3/2 <= alpha <= sqrt(n); got alpha={alpha}, n={graph.n}"
        )
    if table is None:
        table = default_table(graph, alpha, seed)
    scheme = SCHEMES["rca2"]
    return _run_tree(graph, alpha, seed, run, scheme, scheme.branching, table)


def replay(pointer: CutPointer, graph: MultiGraph) -> Cut:
    """Regenerates the cut a pointer refers to by replaying its tree path."""
    if pointer.scheme not in SCHEMES:
        raise ReconstructionError(f"cannot replay a {pointer.scheme!r} pointer")
    scheme = SCHEMES[pointer.scheme]
    leaf = ceil_two_alpha(pointer.alpha)
    node = graph
    rng = derive_rng(pointer.seed, scheme.stream, pointer.run)
    for depth in range(1, len(pointer.path) + 1):
        if node.n <= leaf:
            raise ReconstructionError(f"path {pointer.path} continues below a leaf")
        rng = derive_rng(pointer.seed, scheme.stream, pointer.run, *pointer.path[:depth])
        node = contract_to(node, scheme.target(node.n, leaf), rng)
    if node.n > leaf:
        raise ReconstructionError(f"path {pointer.path} stops above the leaf level")
    return draw_uniform_cut(node, rng)


def reconstruct(record: CutRecord, graph: MultiGraph, table: HashTable) -> Cut:
    """
    Rebuilds the full cut behind a record.

    ``table`` is the hash table the record's id was computed with. Raises
    ReconstructionError when the replayed cut's weight or id disagrees with
    the record.
    """
    cut = replay(record.pointer, graph)
    if cut.weight != record.weight:
        raise ReconstructionError(
            f"replayed weight {cut.weight} does not match record weight {record.weight}"
        )
    if cut_id(table, cut.shore) != record.id:
        raise ReconstructionError(f"replayed cut does not hash to record id {record.id}")
    return cut


class ReplayResolver:
    """CutResolver that replays RCA pointers, caching the shores it has built."""

    def __init__(self) -> None:
        self._cache: Dict[CutPointer, FrozenSet[int]] = {}

    def shore(self, pointer: CutPointer, graph: MultiGraph) -> FrozenSet[int]:
        """Returns the shore of the pointed-to cut."""
        cached = self._cache.get(pointer)
        if cached is None:
            cached = replay(pointer, graph).shore
            self._cache[pointer] = cached
        return cached


def rca_iteration_budget(n: int, eps: float, c_pipe: float = 1.0) -> int:
    """Number of RCA runs the pipeline performs: ceil(c_pipe * n^3 / eps^2)."""
    if n < 2:
        raise InfeasibleParameterError(f"n must be at least 2, got {n}")
    eps_value = exact(eps)
    if not 0 < eps_value <= exact("1/2"):
        raise InfeasibleParameterError(f"eps must lie in (0, 1/2], got {eps}")
    return math.ceil(exact(c_pipe) * n**3 / eps_value**2)


def uses_rca2(n: int, alpha: AlphaLike) -> bool:
    """True when alpha is in RCA2's range 3/2 <= alpha <= sqrt(n)."""
    value = exact(alpha)
    return exact("3/2") <= value and value * value <= n


def alpha_cut_run_count(n: int, alpha: AlphaLike, c_enum: float = 1.0) -> int:
    """
    Independent runs needed so that every alpha-cut is found w.h.p.

    Each run hits a fixed alpha-cut with probability roughly 1/w, where w is
    n^(2 alpha - 5/2) for RCA2, n^(2 alpha - 2) log2 n for RCA, and the cut
    count of G when no contraction happens. Coupon collection over at most
    N = min(n^(2 alpha), 2^(n-1) - 1) cuts then needs about w ln(N / miss).
    """
    a = float(exact(alpha))
    leaf = ceil_two_alpha(alpha)
    cut_total = _cut_total(n)
    bound = max(1.0, min(float(n) ** (2 * a), cut_total))
    if n <= leaf:
        inverse_hit = cut_total
    elif uses_rca2(n, alpha):
        inverse_hit = float(n) ** (2 * a - 2.5)
    else:
        inverse_hit = float(n) ** (2 * a - 2) * math.log2(n)
    inverse_hit = max(1.0, inverse_hit)
    return math.ceil(2 * c_enum * inverse_hit * math.log(bound / ENUMERATION_MISS_RATE))


def collect_runs(
    graph: MultiGraph,
    alpha: AlphaLike,
    seed: int,
    runs: int,
    table: HashTable,
    *,
    scheme: str = "rca",
    threads: int = 1,
) -> Tuple[List[CutRecord], int]:
    """
    Performs ``runs`` independent runs and merges their records.

    Records are deduplicated by id keeping the first in run order. Returns
    the merged records and the total node count.
    """
    # pylint: disable=too-many-arguments
    block_size = 64

    def do_block(block: range) -> Tuple[List[CutRecord], int]:
        merged: Dict[int, CutRecord] = {}
        nodes = 0
        for run in block:
            if scheme == "rca2":
                result = run_rca2(graph, alpha, seed, run=run, table=table)
            else:
                result = run_rca(graph, alpha, seed, run=run, table=table)
            nodes += result.node_count
            for record in result.emitted:
                merged.setdefault(record.id, record)
        return list(merged.values()), nodes

    blocks = [range(s, min(s + block_size, runs)) for s in range(0, runs, block_size)]
    merged: Dict[int, CutRecord] = {}
    total_nodes = 0
    for records, nodes in run_parallel(do_block, blocks, threads):
        total_nodes += nodes
        for record in records:
            merged.setdefault(record.id, record)
    return list(merged.values()), total_nodes


def enumerate_alpha_cuts(
    graph: MultiGraph,
    alpha: AlphaLike,
    seed: int,
    *,
    c_enum: float = 1.0,
    p: float = 0.5,
    table: Optional[HashTable] = None,
    threads: int = 1,
) -> CutCollection:
    """
    Collects every alpha-cut of G with high probability.

    Uses repeated RCA runs for alpha < 3/2 (or alpha > sqrt(n)) and RCA2
    runs otherwise, then drops cuts heavier than alpha * c.
    """
    # pylint: disable=too-many-arguments
    c, _ = min_cut(graph)
    if table is None:
        table = default_table(graph, alpha, seed)
    scheme = "rca2" if uses_rca2(graph.n, alpha) else "rca"
    runs = alpha_cut_run_count(graph.n, alpha, c_enum)
    logger.info("Enumerating %s-cuts with %d %s runs", alpha, runs, scheme)
    records, nodes = collect_runs(
        graph, alpha, seed, runs, table, scheme=scheme, threads=threads
    )
    limit = exact(alpha) * c
    kept = [r for r in records if r.weight <= limit]
    logger.info(
        "Found %d distinct cuts (%d within alpha*c) over %d tree nodes",
        len(records),
        len(kept),
        nodes,
    )
    return build_collection(kept, table, p, resolver=ReplayResolver())

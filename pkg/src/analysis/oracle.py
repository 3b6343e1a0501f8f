"""
Exact brute-force oracles for small graphs.

Everything here enumerates: failure patterns over adjacent pairs, all
2^(n-1) - 1 cuts, or every random choice of the Contraction Algorithm.
Each function refuses inputs above its OracleLimits cap instead of
truncating.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from src.algorithms.multigraph import (
    AlphaLike,
    MultiGraph,
    canonical_shore,
    ceil_two_alpha,
    contract_edge,
    exact,
    merge_matrix,
    min_cut,
)
from src.algorithms.sampling import BATCH_SIZE, batch_components, sample_survivors
from src.errors import CapExceededError, InfeasibleParameterError
from src.models import Cut, OracleLimits
from src.rng import Stream, derive_rng

logger = logging.getLogger(__name__)

PATTERN_CHUNK = 1 << 14
DEFAULT_LIMITS = OracleLimits()

ShoreLike = Union[Cut, Iterable[int]]


def _require(value: int, cap: int, what: str) -> None:
    if value > cap:
        raise CapExceededError(f"{what}={value} exceeds the oracle cap {cap}")


def cut_sides(n: int) -> np.ndarray:
    """
    Side bits for every cut of an n-vertex graph.

    Row t describes cut code t + 1: vertex 1 is always on side 0 (the
    shore), vertex k >= 2 sits on side bit k - 2 of the code.
    """
    codes = np.arange(1, 1 << (n - 1), dtype=np.int64)
    sides = np.zeros((len(codes), n), dtype=np.int8)
    for k in range(1, n):
        sides[:, k] = (codes >> (k - 1)) & 1
    return sides


def _weights_over(matrix: np.ndarray, sides: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(np.triu(matrix, 1))
    weights = np.zeros(sides.shape[0], dtype=np.int64)
    for i, j in zip(rows, cols):
        weights += matrix[i, j] * (sides[:, i] ^ sides[:, j])
    return weights


def all_cuts(graph: MultiGraph, limits: OracleLimits = DEFAULT_LIMITS) -> List[Cut]:
    """Every cut of the graph, as original-vertex shores."""
    _require(graph.n, limits.max_n_cuts, "n")
    sides = cut_sides(graph.n)
    weights = _weights_over(graph.mult, sides)
    cuts = []
    for row, weight in zip(sides, weights):
        shore = frozenset().union(*(graph.groups[v] for v in np.flatnonzero(row == 0)))
        cuts.append(Cut(canonical_shore(shore, graph.orig_n), int(weight)))
    return cuts


def zbar(graph: MultiGraph, p: float, limits: OracleLimits = DEFAULT_LIMITS) -> float:
    """Partition function: sum over all cuts of p^|C|."""
    _require(graph.n, limits.max_n_cuts, "n")
    weights = _weights_over(graph.mult, cut_sides(graph.n))
    return math.fsum(float(p) ** int(w) for w in weights)


def enumerate_alpha_cuts_bruteforce(
    graph: MultiGraph, alpha: AlphaLike, limits: OracleLimits = DEFAULT_LIMITS
) -> List[Cut]:
    """All cuts of weight at most alpha * c."""
    cuts = all_cuts(graph, limits)
    c = min(cut.weight for cut in cuts)
    limit = exact(alpha) * c
    return [cut for cut in cuts if cut.weight <= limit]


def _excluded_matrix(
    graph: MultiGraph, excluded: Union[np.ndarray, Sequence[Tuple[int, int]]]
) -> np.ndarray:
    if isinstance(excluded, np.ndarray):
        matrix = np.array(excluded, dtype=np.int64)
    else:
        matrix = np.zeros_like(graph.mult)
        for u, v in excluded:
            matrix[u - 1, v - 1] += 1
            matrix[v - 1, u - 1] += 1
    if matrix.shape != graph.mult.shape or np.any(matrix > graph.mult) or np.any(matrix < 0):
        raise InfeasibleParameterError("C must be a sub-multiset of the graph's edges")
    return matrix


def a_gamma(
    graph: MultiGraph,
    excluded: Union[np.ndarray, Sequence[Tuple[int, int]]],
    gamma: float,
    c: int,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> float:
    """
    Discounted partition function: sum over cuts C' of exp(-gamma |C' - C| / c).

    ``excluded`` is the edge multiset C restricted to this graph.
    """
    if graph.n < 2:
        return 0.0
    _require(graph.n, limits.max_n_cuts, "n")
    remaining = graph.mult - _excluded_matrix(graph, excluded)
    weights = _weights_over(remaining, cut_sides(graph.n))
    return math.fsum(math.exp(-gamma * int(w) / c) for w in weights)


def a_gamma_step(
    graph: MultiGraph,
    excluded: Union[np.ndarray, Sequence[Tuple[int, int]]],
    gamma: float,
    c: int,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> float:
    """
    Exact one-step expectation of A_{gamma - c/m} for the Contraction Process with L = C.

    m is the edge count of the current graph. The bottom state contributes 0.
    """
    matrix = _excluded_matrix(graph, excluded)
    free = graph.mult - matrix
    total_free = int(np.triu(free, 1).sum())
    if total_free == 0:
        return 0.0
    next_gamma = gamma - c / graph.m
    terms = []
    rows, cols = np.nonzero(np.triu(free, 1))
    for i, j in zip(rows, cols):
        weight = int(free[i, j]) / total_free
        child = contract_edge(graph, int(i) + 1, int(j) + 1)
        child_excluded = merge_matrix(matrix, int(i), int(j))
        terms.append(weight * a_gamma(child, child_excluded, next_gamma, c, limits))
    return math.fsum(terms)


def _pair_patterns(graph: MultiGraph, limits: OracleLimits):
    """Yields (failed-pair bit matrix, pattern probabilities) chunk by chunk."""
    _require(graph.m, limits.max_m_subsets, "m")
    _, _, mults = graph.pairs()
    count = len(mults)
    bits = np.arange(count, dtype=np.int64)
    for start in range(0, 1 << count, PATTERN_CHUNK):
        codes = np.arange(start, min(start + PATTERN_CHUNK, 1 << count), dtype=np.int64)
        failed = ((codes[:, None] >> bits) & 1).astype(bool)
        yield codes, failed


def _pattern_probs(failed: np.ndarray, mults: np.ndarray, p: float) -> np.ndarray:
    pair_fail = np.power(float(p), mults.astype(float))
    return np.prod(np.where(failed, pair_fail, 1.0 - pair_fail), axis=1)


def exact_U(  # pylint: disable=invalid-name
    graph: MultiGraph, p: float, limits: OracleLimits = DEFAULT_LIMITS
) -> float:
    """
    Exact unreliability.

    A pair of multiplicity k fails entirely with probability p^k; G is
    disconnected exactly when the surviving pairs leave it disconnected, so
    enumerating pair patterns is equivalent to enumerating edge subsets.
    """
    _, _, mults = graph.pairs()
    partial = []
    for _, failed in _pair_patterns(graph, limits):
        probs = _pattern_probs(failed, mults, p)
        survivors = np.where(failed, 0, mults)
        counts, _ = batch_components(graph, survivors)
        partial.append(math.fsum(probs[counts > 1].tolist()))
    return math.fsum(partial)


def exact_UA(  # pylint: disable=invalid-name
    graph: MultiGraph,
    cuts: Iterable[ShoreLike],
    p: float,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> float:
    """Exact probability that at least one listed cut has all its edges failed."""
    rows, cols, mults = graph.pairs()
    masks = []
    for item in cuts:
        shore = item.shore if isinstance(item, Cut) else canonical_shore(item, graph.orig_n)
        side = graph.side_mask(shore)
        crossing = np.flatnonzero(side[rows] != side[cols])
        masks.append(int(sum(1 << int(k) for k in crossing)))
    partial = []
    for codes, failed in _pair_patterns(graph, limits):
        hit = np.zeros(len(codes), dtype=bool)
        for mask in masks:
            hit |= (codes & mask) == mask
        probs = _pattern_probs(failed, mults, p)
        partial.append(math.fsum(probs[hit].tolist()))
    return math.fsum(partial)


def exact_ca_selection_prob(
    graph: MultiGraph,
    cut: ShoreLike,
    alpha: AlphaLike,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> Fraction:
    """
    Exact probability that the Contraction Algorithm outputs ``cut``.

    Recurses over every edge choice; choices crossing the cut are pruned
    since they destroy it. At ceil(2 alpha) vertices the final draw picks
    the cut with probability 1 / (2^(k-1) - 1).
    """
    _require(graph.n, limits.max_n_exact_ca, "n")
    shore = cut.shore if isinstance(cut, Cut) else canonical_shore(cut, graph.orig_n)
    leaf = ceil_two_alpha(alpha)
    memo: Dict[FrozenSet[FrozenSet[int]], Fraction] = {}

    def law(node: MultiGraph) -> Fraction:
        key = frozenset(node.groups)
        if key in memo:
            return memo[key]
        if node.n <= leaf:
            value = Fraction(1, 2 ** (node.n - 1) - 1) if node.respects(shore) else Fraction(0)
        else:
            side = node.side_mask(shore)
            value = Fraction(0)
            for u, v, k in node.edges():
                if side[u - 1] != side[v - 1]:
                    continue
                value += Fraction(k, node.m) * law(contract_edge(node, u, v))
        memo[key] = value
        return value

    return law(graph)


@dataclass(frozen=True)
class HistoryLaw:
    """Probability of one contraction history and the edge counts along it."""

    prob: Fraction
    edge_counts: Tuple[int, ...]
    bottom: bool


def exact_cp_history_probs(
    graph: MultiGraph,
    blocked: Union[np.ndarray, Sequence[Tuple[int, int]]],
    stop: int,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> Dict[Tuple[Tuple[int, int], ...], HistoryLaw]:
    """
    Every history of the Contraction Process CP(G, L) down to ``stop`` vertices.

    Histories are tuples of merged pairs, each named by the smallest
    original vertex of the two merged groups. ``edge_counts`` lists M_r for
    every stage visited, starting at r = n.
    """
    _require(graph.n, limits.max_n_exact_ca, "n")
    if stop < 1:
        raise InfeasibleParameterError(f"stop must be at least 1, got {stop}")
    laws: Dict[Tuple[Tuple[int, int], ...], HistoryLaw] = {}

    def expand(
        node: MultiGraph,
        matrix: np.ndarray,
        history: Tuple[Tuple[int, int], ...],
        prob: Fraction,
        counts: Tuple[int, ...],
    ) -> None:
        counts = counts + (node.m,)
        free = node.mult - matrix
        total_free = int(np.triu(free, 1).sum())
        if node.n <= stop or total_free == 0:
            laws[history] = HistoryLaw(prob, counts, bottom=node.n > stop)
            return
        rows, cols = np.nonzero(np.triu(free, 1))
        for i, j in zip(rows, cols):
            i, j = int(i), int(j)
            a, b = min(node.groups[i]), min(node.groups[j])
            step = (min(a, b), max(a, b))
            expand(
                contract_edge(node, i + 1, j + 1),
                merge_matrix(matrix, i, j),
                history + (step,),
                prob * Fraction(int(free[i, j]), total_free),
                counts,
            )

    expand(graph, _excluded_matrix(graph, blocked), (), Fraction(1), ())
    return laws


def exact_ca_history_probs(
    graph: MultiGraph, stop: int, limits: OracleLimits = DEFAULT_LIMITS
) -> Dict[Tuple[Tuple[int, int], ...], HistoryLaw]:
    """Every Contraction Algorithm history down to ``stop`` vertices."""
    return exact_cp_history_probs(graph, np.zeros_like(graph.mult), stop, limits)


def _tail_delta(graph: MultiGraph, p: float) -> Optional[float]:
    if not 0 < p < 1:
        return None
    c, _ = min_cut(graph)
    return -2.0 - c * math.log(p) / math.log(graph.n)


def component_tail(
    graph: MultiGraph, p: float, trials: int, seed: int
) -> Dict[str, Any]:
    """
    Empirical P(R >= r) for r = 1..n with Wilson 95% intervals.

    When delta > 0 each row also carries the reference bound
    1.01 n^(-r delta / 2) / r!. ``zbar_estimate`` is the sample mean of
    2^(R-1) - 1, the number of failed cuts.
    """
    if trials <= 0:
        raise InfeasibleParameterError("trials must be positive")
    counts: List[np.ndarray] = []
    for batch, start in enumerate(range(0, trials, BATCH_SIZE)):
        size = min(BATCH_SIZE, trials - start)
        rng = derive_rng(seed, Stream.TAIL, batch)
        batch_counts, _ = batch_components(graph, sample_survivors(graph, p, rng, size))
        counts.append(batch_counts)
    components = np.concatenate(counts)
    delta = _tail_delta(graph, p)
    rows = []
    for r in range(1, graph.n + 1):
        hits = int(np.count_nonzero(components >= r))
        interval = stats.binomtest(hits, trials).proportion_ci(
            confidence_level=0.95, method="wilson"
        )
        bound = None
        if delta is not None and delta > 0:
            bound = 1.01 * graph.n ** (-r * delta / 2) / math.factorial(r)
        rows.append(
            {
                "r": r,
                "tail": hits / trials,
                "lo": float(interval.low),
                "hi": float(interval.high),
                "bound": bound,
            }
        )
    failed_cuts = [float(2 ** (int(r) - 1) - 1) for r in components]
    return {
        "trials": trials,
        "delta": delta,
        "rows": rows,
        "zbar_estimate": math.fsum(failed_cuts) / trials,
    }

"""
Union-of-cuts estimator for U_A(p).

One trial selects a stored cut Q with probability proportional to
p^|Q|, fails all of Q's edges, fails every other edge independently with
probability p, and counts how many stored cuts failed as a result. Since a
failed cut is exactly a bipartition of the surviving components, the count
J is found by enumerating the 2^(R-1) - 1 bipartitions of the R components
and testing membership. sum_pw / J is an unbiased estimate of U_A(p).
"""

import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, List, Optional

import numpy as np

from src.algorithms.cutstore import CutCollection
from src.algorithms.multigraph import MultiGraph, exact, min_cut
from src.algorithms.sampling import sample_survivors, single_sample_components
from src.algorithms.workers import run_parallel
from src.errors import InfeasibleParameterError, InvariantViolation
from src.models import Branch, CutRecord, Estimate, TrialOutcome
from src.rng import Stream, derive_rng

logger = logging.getLogger(__name__)

CHUNK_TRIALS = 512
MAX_ABORT_RATIO = 10


def _select_index(collection: CutCollection, rng: np.random.Generator) -> int:
    if len(collection) == 0 or collection.sum_pw <= 0:
        raise InfeasibleParameterError("cannot select from an empty collection")
    ticket = rng.random() * collection.sum_pw
    index = int(np.searchsorted(collection.prefix, ticket, side="right"))
    return min(index, len(collection) - 1)


def weighted_select(collection: CutCollection, rng: np.random.Generator) -> CutRecord:
    """Draws a record with probability p^weight / sum_pw."""
    return collection.records[_select_index(collection, rng)]


def sample_once(
    graph: MultiGraph,
    collection: CutCollection,
    p: float,
    rng: np.random.Generator,
    *,
    r_max: int = 30,
) -> Optional[TrialOutcome]:
    """
    One estimator trial.

    Returns None when the failure left more than ``r_max`` components; the
    caller counts that as an abort and draws again.
    """
    # pylint: disable=too-many-locals
    resolver = collection.resolver
    if resolver is None:
        raise InvariantViolation("collection has no resolver")
    q_index = _select_index(collection, rng)
    q_shore = resolver.shore(collection.records[q_index].pointer, graph)

    mask = graph.side_mask(q_shore)
    rows, cols, _ = graph.pairs()
    survivors = sample_survivors(graph, p, rng, 1)[0]
    survivors[mask[rows] != mask[cols]] = 0
    components, labels = single_sample_components(graph, survivors)
    if components > r_max:
        return None

    # Component 0 always holds vertex 1.
    order: List[int] = [int(labels[graph.vertex_of(1) - 1])]
    for label in labels:
        if label not in order:
            order.append(int(label))
    members: List[FrozenSet[int]] = []
    for label in order:
        members.append(
            frozenset().union(*(graph.groups[v] for v in np.flatnonzero(labels == label)))
        )
    table = collection.table
    modulus = 1 << table.b
    hashes = [sum(table.values[v - 1] for v in group) for group in members]

    others = components - 1
    full = (1 << others) - 1
    matches = 0
    running = 0
    previous = 0
    for step in range(1 << others):
        code = step ^ (step >> 1)
        if step:
            flipped = code ^ previous
            bit = flipped.bit_length() - 1
            running += hashes[bit + 1] if code & flipped else -hashes[bit + 1]
        previous = code
        if code == full:
            continue
        index = collection.find((hashes[0] + running) % modulus)
        if index is None:
            continue
        shore = members[0].union(*(members[k + 1] for k in range(others) if code >> k & 1))
        if resolver.shore(collection.records[index].pointer, graph) == shore:
            matches += 1

    if matches < 1:
        raise InvariantViolation("the selected cut was not found among the failed cuts")
    return TrialOutcome(
        q_index=q_index,
        components=components,
        matches=matches,
        u_hat=collection.sum_pw / matches,
        checks=full,
    )


@dataclass
class _ChunkResult:
    values: List[float]
    checks: int
    aborts: int


def _median_of_means(values: List[float], groups: int) -> float:
    parts = np.array_split(np.asarray(values, dtype=float), groups)
    return float(np.median([math.fsum(part) / len(part) for part in parts if len(part)]))


def estimate_UA(  # pylint: disable=invalid-name
    graph: MultiGraph,
    collection: CutCollection,
    p: float,
    eps: float,
    seed: int,
    *,
    lam: float = 64.0,
    r_max: int = 30,
    mom_groups: int = 0,
    threads: int = 1,
    c: Optional[int] = None,
) -> Estimate:
    """
    Averages ceil(lam / eps^2) independent trials.

    The collection must contain at least one minimum cut. Trials run in
    fixed-size chunks with their own streams and are merged with exact
    summation, so the result does not depend on ``threads``.
    """
    # pylint: disable=too-many-arguments,too-many-locals
    if not 0 < eps <= 0.5:
        raise InfeasibleParameterError(f"eps must lie in (0, 1/2], got {eps}")
    if len(collection) == 0:
        raise InfeasibleParameterError("the cut collection is empty")
    if p != collection.p:
        raise InfeasibleParameterError(
            f"collection was built for p={collection.p}, estimator called with p={p}"
        )
    if c is None:
        c, _ = min_cut(graph)
    if not any(record.weight == c for record in collection.records):
        raise InvariantViolation(f"no minimum cut (weight {c}) in the collection")

    trials = math.ceil(exact(lam) / exact(eps) ** 2)

    def run_chunk(chunk: int) -> _ChunkResult:
        rng = derive_rng(seed, Stream.ESTIMATOR, chunk)
        quota = min(CHUNK_TRIALS, trials - chunk * CHUNK_TRIALS)
        result = _ChunkResult(values=[], checks=0, aborts=0)
        while len(result.values) < quota:
            outcome = sample_once(graph, collection, p, rng, r_max=r_max)
            if outcome is None:
                result.aborts += 1
                if result.aborts > MAX_ABORT_RATIO * quota:
                    raise InfeasibleParameterError(
                        f"more than {r_max} components in most trials; U(p) is not small"
                    )
                continue
            result.values.append(outcome.u_hat)
            result.checks += outcome.checks
        return result

    chunks = run_parallel(run_chunk, range(math.ceil(trials / CHUNK_TRIALS)), threads)
    values = [v for chunk in chunks for v in chunk.values]
    aborts = sum(chunk.aborts for chunk in chunks)
    checks = sum(chunk.checks for chunk in chunks)
    if aborts:
        logger.warning("Estimator aborted %d trials above %d components", aborts, r_max)

    mean = math.fsum(values) / trials
    variance = math.fsum((v - mean) ** 2 for v in values) / max(1, trials - 1)
    value = _median_of_means(values, mom_groups) if mom_groups > 0 else mean
    rel_std = math.sqrt(variance / trials) / mean if mean > 0 else 0.0
    logger.info("Estimator: %d trials, mean %.6g, rel_std %.3g", trials, mean, rel_std)
    return Estimate(
        value=min(1.0, value),
        rel_std=rel_std,
        trials=trials,
        method=Branch.CUT_ENUMERATION,
        seed=seed,
        aborts=aborts,
        diagnostics={
            "collection_size": len(collection),
            "sum_pw": collection.sum_pw,
            "mean_checks": checks / trials,
            "rel_var_per_trial": variance / mean**2 if mean > 0 else 0.0,
        },
    )

"""
End-to-end unreliability estimation.

Derives (c, delta, rho) from the input, runs a preliminary Monte Carlo gate
and then either plain Monte Carlo (when disconnection is common enough to
observe) or cut enumeration with the recursive contraction algorithm
followed by the union-of-cuts estimator.
"""

import logging
import math
import time
from typing import Any, Dict, Iterator, Optional

import numpy as np

from src.algorithms.cutstore import HashTable, build_collection
from src.algorithms.estimator import estimate_UA
from src.algorithms.multigraph import MultiGraph, exact, min_cut
from src.algorithms.rca import (
    ReplayResolver,
    collect_runs,
    rca_iteration_budget,
    tree_depth,
)
from src.algorithms.sampling import BATCH_SIZE, count_disconnected
from src.algorithms.workers import run_parallel
from src.analysis.oracle import zbar
from src.config import PipelineConfig
from src.errors import InfeasibleParameterError, InvariantViolation
from src.models import Branch, Estimate, GateOutcome, OracleLimits, ReliabilityParams
from src.rng import Stream, derive_rng

logger = logging.getLogger(__name__)


def alpha_star_max(delta: float, rho: float) -> float:
    """Computable cut-size bound max(1, 1 + (2 + rho) / delta)."""
    if delta <= 0:
        raise InfeasibleParameterError(
            f"alpha* is only defined for delta > 0, got {delta}; use Monte Carlo"
        )
    return max(1.0, 1.0 + (2.0 + rho) / delta)


def compute_params(
    graph: MultiGraph,
    p: float,
    eps: float,
    K: float = 2.5,  # pylint: disable=invalid-name
    limits: Optional[OracleLimits] = None,
) -> ReliabilityParams:
    """
    Parameters of the instance.

    delta solves p^c = n^(-2-delta) and rho = ln(1/eps) / ln n. When the
    graph is small enough for the cut oracle, beta (from
    zbar = n^(-2-delta+beta)) is reported too.
    """
    if not 0 < p < 1:
        raise InfeasibleParameterError(f"p must lie in (0, 1), got {p}")
    if not 0 < eps <= 0.5:
        raise InfeasibleParameterError(f"eps must lie in (0, 1/2], got {eps}")
    if K <= 2:
        raise InfeasibleParameterError(f"K must exceed 2, got {K}")
    c, _ = min_cut(graph)
    log_n = math.log(graph.n)
    delta = -2.0 - c * math.log(p) / log_n
    rho = math.log(1.0 / eps) / log_n
    star = alpha_star_max(delta, rho) if delta > 0 else None

    beta = None
    limits = limits or OracleLimits()
    if graph.n <= limits.max_n_cuts:
        partition = zbar(graph, p, limits)
        if partition > 0:
            beta = math.log(partition) / log_n + 2.0 + delta
    return ReliabilityParams(
        p=p,
        eps=eps,
        n=graph.n,
        m=graph.m,
        c=c,
        delta=delta,
        rho=rho,
        K=K,
        alpha_star_max=star,
        beta_diag=beta,
    )


def _batches(
    graph: MultiGraph,
    p: float,
    seed: int,
    stream: Stream,
    attempt: int,
    budget: int,
    threads: int,
) -> Iterator[np.ndarray]:
    """
    Disconnection indicators batch by batch, in batch order.

    Batch k always uses stream (seed, stream, attempt, k); ``threads``
    batches are drawn concurrently and yielded in order, so consumers that
    stop early see the same samples for any thread count.
    """
    # pylint: disable=too-many-arguments,too-many-positional-arguments
    starts = range(0, budget, BATCH_SIZE)

    def draw(batch: int) -> np.ndarray:
        size = min(BATCH_SIZE, budget - starts[batch])
        return count_disconnected(graph, p, derive_rng(seed, stream, attempt, batch), size)

    for first in range(0, len(starts), threads):
        wave = range(first, min(first + threads, len(starts)))
        yield from run_parallel(draw, wave, threads)


def gate(
    graph: MultiGraph,
    p: float,
    K: float,  # pylint: disable=invalid-name
    phi: float,
    seed: int,
    *,
    attempt: int = 0,
    threads: int = 1,
) -> GateOutcome:
    """
    Preliminary Monte Carlo: up to ceil(phi * n^K) failure samples.

    Chooses Monte Carlo as soon as any sample disconnects G, otherwise cut
    enumeration. Batches are drawn in order and the gate stops after the
    first batch containing a disconnection.
    """
    # pylint: disable=too-many-arguments
    if phi < 1:
        raise InfeasibleParameterError(f"phi must be at least 1, got {phi}")
    budget = math.ceil(phi * graph.n**K)
    samples = 0
    disconnections = 0
    for failed in _batches(graph, p, seed, Stream.GATE, attempt, budget, threads):
        samples += len(failed)
        disconnections = int(np.count_nonzero(failed))
        if disconnections:
            break
    branch = Branch.MONTE_CARLO if disconnections else Branch.CUT_ENUMERATION
    logger.info(
        "Gate: %d disconnections in %d of %d samples -> %s",
        disconnections,
        samples,
        budget,
        branch.value,
    )
    return GateOutcome(branch=branch, samples=samples, budget=budget, disconnections=disconnections)


def monte_carlo_estimate(
    graph: MultiGraph,
    p: float,
    eps: float,
    seed: int,
    *,
    K: float = 2.5,  # pylint: disable=invalid-name
    c_mc: float = 64.0,
    target_factor: float = 16.0,
    attempt: int = 0,
    threads: int = 1,
) -> Estimate:
    """
    Plain Monte Carlo with adaptive stopping.

    Samples until ceil(target_factor / eps^2) disconnections have been seen
    or ceil(c_mc * n^K / eps^2) samples are spent. With no disconnection at
    all the value is 0 and ``upper_bound`` carries the 95% rule-of-three
    bound 3 / samples.
    """
    # pylint: disable=too-many-arguments,too-many-locals
    if not 0 < eps <= 0.5:
        raise InfeasibleParameterError(f"eps must lie in (0, 1/2], got {eps}")
    target = math.ceil(exact(target_factor) / exact(eps) ** 2)
    budget = math.ceil(c_mc * graph.n**K / eps**2)
    samples = 0
    disconnections = 0
    for failed in _batches(graph, p, seed, Stream.MONTE_CARLO, attempt, budget, threads):
        hits = np.cumsum(failed)
        needed = target - disconnections
        if hits[-1] >= needed:
            samples += int(np.searchsorted(hits, needed)) + 1
            disconnections = target
            break
        samples += len(failed)
        disconnections += int(hits[-1])

    logger.info("Monte Carlo: %d disconnections in %d samples", disconnections, samples)
    if disconnections == 0:
        return Estimate(
            value=0.0,
            rel_std=1.0,
            trials=samples,
            method=Branch.MONTE_CARLO,
            seed=seed,
            upper_bound=3.0 / samples,
            diagnostics={"disconnections": 0, "target": target, "budget": budget},
        )
    value = disconnections / samples
    rel_std = math.sqrt((1.0 - value) / (samples * value)) if value < 1 else 0.0
    return Estimate(
        value=value,
        rel_std=rel_std,
        trials=samples,
        method=Branch.MONTE_CARLO,
        seed=seed,
        diagnostics={"disconnections": disconnections, "target": target, "budget": budget},
    )


class ReliabilityPipeline:
    """
    Orchestrates one estimate of U(p).

    The phases run in sequence; each phase fans out over the configured
    number of threads.
    """

    def __init__(self, config: PipelineConfig):
        self.config = config

    def _choose_branch(
        self, graph: MultiGraph, params: ReliabilityParams, seed: int
    ) -> Dict[str, Any]:
        """Returns the branch evidence, whose "branch" entry is the decision."""
        forced = self.config.force_branch
        if forced == "cuts":
            if params.alpha_star_max is None:
                raise InfeasibleParameterError(
                    f"cut enumeration needs delta > 0, got delta={params.delta:.6g}"
                )
            return {"branch": Branch.CUT_ENUMERATION.value, "forced": True}
        if forced == "mc":
            return {"branch": Branch.MONTE_CARLO.value, "forced": True}
        if params.delta <= 0:
            logger.warning(
                "delta=%.4g <= 0: p^c >= n^-2, forcing the Monte Carlo branch", params.delta
            )
            return {"branch": Branch.MONTE_CARLO.value, "forced": False, "delta_nonpositive": True}
        outcome = gate(
            graph, params.p, self.config.K, self.config.phi, seed, threads=self.config.threads
        )
        return {**outcome.as_dict(), "forced": False}

    def _monte_carlo(
        self, graph: MultiGraph, params: ReliabilityParams, seed: int, attempt: int = 0
    ) -> Estimate:
        return monte_carlo_estimate(
            graph,
            params.p,
            params.eps,
            seed,
            K=self.config.K,
            c_mc=self.config.c_mc,
            target_factor=self.config.mc_target_factor,
            attempt=attempt,
            threads=self.config.threads,
        )

    def _cut_enumeration(
        self, graph: MultiGraph, params: ReliabilityParams, seed: int
    ) -> Estimate:
        """RCA runs at alpha*_max, then the union-of-cuts estimator."""
        alpha = params.alpha_star_max
        if alpha is None:
            raise InvariantViolation("cut enumeration reached with delta <= 0")
        cfg = self.config
        runs = rca_iteration_budget(graph.n, params.eps, cfg.c_pipe)
        leaves = 4.0 ** tree_depth("rca", graph.n, alpha)
        cut_total = 2.0 ** min(graph.n - 1, 1000) - 1.0
        capacity = int(max(2.0, min(cut_total, runs * leaves)))
        table = HashTable.create(graph.orig_n, capacity, seed, cfg.hash_phi)
        logger.info(
            "Cut enumeration: %d RCA runs at alpha=%.4g, %d-bit ids", runs, alpha, table.b
        )

        records, nodes = collect_runs(
            graph, alpha, seed, runs, table, scheme="rca", threads=cfg.threads
        )
        collection = build_collection(records, table, params.p, resolver=ReplayResolver())
        logger.info("Collected %d distinct cuts over %d tree nodes", len(collection), nodes)
        if not any(record.weight == params.c for record in collection.records):
            raise InvariantViolation(
                f"no minimum cut (weight {params.c}) among {len(collection)} enumerated cuts"
            )

        estimate = estimate_UA(
            graph,
            collection,
            params.p,
            params.eps,
            seed,
            lam=cfg.lam,
            r_max=cfg.r_max,
            mom_groups=cfg.median_of_means_groups,
            threads=cfg.threads,
            c=params.c,
        )
        estimate.diagnostics.update(
            {
                "weight_histogram": collection.weight_histogram(),
                "runs": runs,
                "nodes": nodes,
                "hash_bits": table.b,
            }
        )
        return estimate

    def run(self, graph: MultiGraph, p: float, eps: float, seed: int) -> Estimate:
        """Estimates U(p) for ``graph`` to relative error ``eps``."""
        started = time.perf_counter()
        params = compute_params(graph, p, eps, self.config.K, self.config.oracle)
        logger.info(
            "n=%d m=%d c=%d delta=%.4g rho=%.4g",
            params.n,
            params.m,
            params.c,
            params.delta,
            params.rho,
        )
        evidence = self._choose_branch(graph, params, seed)

        if evidence["branch"] == Branch.MONTE_CARLO.value:
            estimate = self._monte_carlo(graph, params, seed)
            rerun_allowed = not evidence["forced"] and params.alpha_star_max is not None
            if estimate.upper_bound is not None and rerun_allowed:
                logger.warning(
                    "Monte Carlo saw no disconnection after the gate did; rerunning the gate"
                )
                rerun = gate(
                    graph,
                    p,
                    self.config.K,
                    self.config.phi,
                    seed,
                    attempt=1,
                    threads=self.config.threads,
                )
                evidence["rerun"] = rerun.as_dict()
                if rerun.branch == Branch.CUT_ENUMERATION:
                    evidence["branch"] = Branch.CUT_ENUMERATION.value
                    estimate = self._cut_enumeration(graph, params, seed)
                else:
                    logger.info("Gate rerun kept Monte Carlo; repeating it with a fresh stream")
                    estimate = self._monte_carlo(graph, params, seed, attempt=1)
        else:
            estimate = self._cut_enumeration(graph, params, seed)

        estimate.diagnostics["branch_evidence"] = evidence
        estimate.diagnostics["params"] = params
        estimate.diagnostics["wall_time_ms"] = (time.perf_counter() - started) * 1000.0
        return estimate


def estimate_unreliability(
    graph: MultiGraph,
    p: float,
    eps: float,
    seed: int,
    config: Optional[PipelineConfig] = None,
) -> Estimate:
    """Runs the full pipeline with ``config`` (defaults when omitted)."""
    return ReliabilityPipeline(config or PipelineConfig()).run(graph, p, eps, seed)


def estimate_document(estimate: Estimate) -> Dict[str, Any]:
    """The JSON-ready result of a pipeline run."""
    params: ReliabilityParams = estimate.diagnostics["params"]
    return {
        "estimate": estimate.value,
        "rel_std": estimate.rel_std,
        "method": estimate.method.value,
        "branch_evidence": estimate.diagnostics["branch_evidence"],
        "n": params.n,
        "m": params.m,
        "c": params.c,
        "delta": params.delta,
        "rho": params.rho,
        "alpha_star_max": params.alpha_star_max,
        "beta": params.beta_diag,
        "collection_size": estimate.diagnostics.get("collection_size"),
        "trials": estimate.trials,
        "aborts": estimate.aborts,
        "upper_bound": estimate.upper_bound,
        "seed": estimate.seed,
        "wall_time_ms": estimate.diagnostics["wall_time_ms"],
    }

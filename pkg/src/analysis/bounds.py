"""
Closed-form bound functions and their numeric grid checks.

h and hbar bound the expected potential S_i of a contraction run in terms
of (beta, delta): h along a Contraction Algorithm run, hbar along a
Contraction Process run that protects a target cut. f_odd and f_rel are the
S_i bounds for odd minimum cuts and for the A_gamma induction.

The grid checks evaluate the inequalities the cut-enumeration analysis
relies on over fine (beta, delta, rho) grids. Cells are bounded at their
upper corner: h and hbar are nondecreasing in beta and delta, so the corner
value bounds the whole cell.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.algorithms.workers import run_parallel
from src.analysis.families import make_odd_cycle_graph
from src.errors import InfeasibleParameterError

logger = logging.getLogger(__name__)

__all__ = [
    "h",
    "hbar",
    "h_prime",
    "hbar_prime",
    "f_odd",
    "f_rel",
    "alpha_star_bounds",
    "cut_count_bound",
    "odd_cut_count_bound",
    "verify_cell",
    "appendix_grid_check",
    "grid_verify_appendix",
    "large_delta_check",
    "hbar_min_check",
    "derivative_check",
    "hbar_below_h_check",
    "make_odd_cycle_graph",
]

TARGET_BASE = 2.95
TARGET_RHO = 1.5
BETA_TOP = 1.0
DELTA_TOP = 1.5
RHO_TOP = 2.1
LARGE_DELTA_TOP = 6.0
BISECTION_STEPS = 48
GRID_BISECTION_STEPS = 24
RHO_KNOT_SPACING = 0.02
DELTA_CHUNK = 256
TOLERANCE = 1e-12


def _h_array(x, beta, delta):
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.log(3.0 - beta + delta)
        above = 2.0 * (2.0 + delta) * (head - np.log(2.0 - beta + delta + x))
        below = 2.0 * (2.0 + delta) * (head - np.log(2.0 + delta)) + 2.0 * (beta - x)
        value = np.where(x >= beta, above, below)
    return np.where(beta >= 1.0, 2.0 * (1.0 - x), value)


def _hbar_array(x, beta, delta):
    return (delta + 2.0) * (1.0 - x) * (5.0 - 2.0 * beta + 2.0 * delta + x) / (
        3.0 - beta + delta
    ) ** 2


def _h_prime_array(x, beta, delta):
    slope = -2.0 * (2.0 + delta) / (2.0 - beta + delta + x)
    return np.where((beta >= 1.0) | (x < beta), -2.0, slope)


def _hbar_prime_array(x, beta, delta):
    return -2.0 * (delta + 2.0) * (2.0 - beta + delta + x) / (3.0 - beta + delta) ** 2


def _check_args(x: float, beta: float, delta: float) -> None:
    if not 0 <= x <= 1:
        raise InfeasibleParameterError(f"x must lie in [0, 1], got {x}")
    if not 0 <= beta <= 2:
        raise InfeasibleParameterError(f"beta must lie in [0, 2], got {beta}")
    if delta <= 0:
        raise InfeasibleParameterError(f"delta must be positive, got {delta}")


def h(x: float, beta: float, delta: float) -> float:
    """Contraction Algorithm potential bound, piecewise in x versus beta."""
    _check_args(x, beta, delta)
    return float(_h_array(x, beta, delta))


def hbar(x: float, beta: float, delta: float) -> float:
    """Contraction Process potential bound (a rational function)."""
    _check_args(x, beta, delta)
    return float(_hbar_array(x, beta, delta))


def h_prime(x: float, beta: float, delta: float) -> float:
    """Derivative of h in x."""
    _check_args(x, beta, delta)
    return float(_h_prime_array(x, beta, delta))


def hbar_prime(x: float, beta: float, delta: float) -> float:
    """Derivative of hbar in x."""
    _check_args(x, beta, delta)
    return float(_hbar_prime_array(x, beta, delta))


def f_odd(i: int, n: int, k: int, c: int) -> float:
    """
    Bound on E[S_i] for a graph with odd min cut c and at most k min cuts.

    For c = 1 the limit form log(n/i + (k/i) log(n/i)) is used.
    """
    if c < 1 or c % 2 == 0:
        raise InfeasibleParameterError(f"c must be odd and positive, got {c}")
    if not 3 <= i <= n:
        raise InfeasibleParameterError(f"need 3 <= i <= n, got i={i}, n={n}")
    if not 0 <= k <= 2 * n:
        raise InfeasibleParameterError(f"need 0 <= k <= 2n, got k={k}")
    if c == 1:
        argument = n / i + (k / i) * math.log(n / i)
    else:
        exponent = 2.0 / (c + 1) - 1.0
        argument = ((i / n) ** exponent * (2 * k + (c - 1) * n) - 2 * k) / ((c - 1) * i)
    if argument <= 0:
        raise InfeasibleParameterError(f"log argument {argument} is not positive")
    return math.log(argument)


def f_rel(i: int, r: int, a: float, gamma: float) -> float:
    """Bound on E[S_i] below an r-vertex contraction subgraph with A_gamma = a."""
    if not 100 <= i <= r:
        raise InfeasibleParameterError(f"need 100 <= i <= r, got i={i}, r={r}")
    if gamma < 2 * math.log(r):
        raise InfeasibleParameterError(f"gamma must be at least 2 log r, got {gamma}")
    if a <= 0:
        raise InfeasibleParameterError(f"a must be positive, got {a}")
    if a > 1:
        return 2.0 * math.log(r / i)
    return gamma * (1.0 - math.log(a / i) ** 2 / math.log(a / r) ** 2)


def alpha_star_bounds(beta: float, delta: float, rho: float) -> Tuple[float, Optional[float]]:
    """
    Upper bounds on alpha* with the asymptotic correction terms dropped.

    The second bound applies only when beta <= 3/2 and is None otherwise.
    """
    if delta <= 0:
        raise InfeasibleParameterError(f"delta must be positive, got {delta}")
    first = (2.0 - beta + delta + rho) / delta
    second = None
    if beta <= 1.5:
        second = (3.0 - beta + delta) ** 2 * (2.0 - beta + delta + rho) / (
            (2.0 - beta + delta) ** 2 * (2.0 + delta)
        )
    return first, second


def cut_count_bound(n: int, alpha: float) -> float:
    """At most n^(2 alpha) cuts have weight <= alpha * c."""
    return float(n) ** (2.0 * alpha)


def odd_cut_count_bound(n: int, alpha: float, c: int) -> float:
    """Reference count n^(2 alpha c / (c + 1)) for graphs with odd min cut c."""
    return float(n) ** (2.0 * alpha * c / (c + 1))


def _steps(limit: float, step: float) -> int:
    return int(math.floor(limit / step + 1e-9))


def _a_max(b, d, r, step):
    """Largest alpha*-bound value a over the cell [b, b+s] x [d, d+s] x [r, r+s]."""
    return (3.0 - b + d) ** 2 / ((2.0 + d) * (2.0 - b + d)) + (r + step) * (
        3.0 - b + d - step
    ) ** 2 / ((2.0 + d) * (2.0 - b + d - step) ** 2)


def _balanced_y(beta, delta, a_max, steps: int = BISECTION_STEPS):
    """y in [0, 1] with h(y) close to hbar(y / a_max), found by bisection."""
    shape = np.broadcast(beta, delta, a_max).shape
    lo = np.zeros(shape)
    hi = np.ones(shape)
    for _ in range(steps):
        mid = (lo + hi) / 2.0
        above = _h_array(mid, beta, delta) > _hbar_array(mid / a_max, beta, delta)
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    start_below = _h_array(0.0, beta, delta) <= _hbar_array(0.0, beta, delta)
    return np.where(start_below, 0.0, hi)


def _corner_slack(beta, delta, r, a_max, y):
    z = np.minimum(y / a_max, 1.0)
    worst = np.maximum(_h_array(y, beta, delta), _hbar_array(z, beta, delta))
    return 2.0 * y + a_max * worst - TARGET_BASE - TARGET_RHO * r


def _cell_values(b, d, r, step):
    beta = b + step
    delta = d + step
    a_max = _a_max(b, d, r, step)
    y = _balanced_y(beta, delta, a_max)
    return _corner_slack(beta, delta, r, a_max, y), y, a_max


def _check_step(step: float) -> None:
    if not 0 < step <= 0.01:
        raise InfeasibleParameterError(f"grid step must lie in (0, 0.01], got {step}")


def verify_cell(b: float, d: float, r: float, step: float = 0.001) -> Dict[str, Any]:
    """Checks 2y + a_max * max(h(y), hbar(y / a_max)) <= 2.95 + 1.5 r on one cell."""
    _check_step(step)
    slack, y, a_max = _cell_values(np.float64(b), np.float64(d), np.float64(r), step)
    return {
        "beta": b,
        "delta": d,
        "rho": r,
        "y": float(y),
        "a_max": float(a_max),
        "slack": float(slack),
        "passed": bool(slack <= 0),
    }


def _summary(name: str, worst: float, cell: Dict[str, float], cells: int, failures: int):
    logger.info("%s: %d cells, %d failures, worst slack %.6g", name, cells, failures, worst)
    return {
        "cells": cells,
        "failures": failures,
        "worst_slack": worst,
        "worst_cell": cell,
        "passed": failures == 0,
    }


def _interpolated_y(b: float, d, r, step: float):
    """
    Balanced y solved on rho knots RHO_KNOT_SPACING apart, interpolated between.

    Any y in [0, 1] gives a valid bound for its cell, so interpolation can
    only loosen the reported slack.
    """
    stride = max(1, int(round(RHO_KNOT_SPACING / step)))
    knots = np.unique(np.append(np.arange(0, r.size, stride), r.size - 1))
    a_knots = _a_max(b, d[:, None], r[knots][None, :], step)
    y_knots = _balanced_y(b + step, d[:, None] + step, a_knots, GRID_BISECTION_STEPS)
    index = np.arange(r.size)
    left = np.clip(np.searchsorted(knots, index, side="right") - 1, 0, knots.size - 2)
    frac = (index - knots[left]) / (knots[left + 1] - knots[left])
    return y_knots[:, left] * (1.0 - frac) + y_knots[:, left + 1] * frac


def _appendix_row(bi: int, step: float) -> Tuple[float, Dict[str, float], int, int]:
    b = bi * step
    d_all = np.arange(max(bi - 1, 0), _steps(DELTA_TOP, step)) * step
    r = np.arange(0, _steps(RHO_TOP, step) + 1) * step
    worst = -math.inf
    cell: Dict[str, float] = {}
    failures = 0
    for start in range(0, d_all.size, DELTA_CHUNK):
        d = d_all[start : start + DELTA_CHUNK]
        a_max = _a_max(b, d[:, None], r[None, :], step)
        y = _interpolated_y(b, d, r, step)
        slack = _corner_slack(b + step, d[:, None] + step, r[None, :], a_max, y)
        failures += int(np.count_nonzero(slack > 0))
        at = np.unravel_index(int(np.argmax(slack)), slack.shape)
        if slack[at] > worst:
            worst = float(slack[at])
            cell = {
                "beta": b,
                "delta": float(d[at[0]]),
                "rho": float(r[at[1]]),
                "y": float(y[at]),
            }
    return worst, cell, int(d_all.size * r.size), failures


def appendix_grid_check(
    step: float = 0.001,
    threads: int = 1,
    beta_slab: Optional[Tuple[float, float]] = None,
) -> Dict[str, Any]:
    """
    2y + a_max * max(h(y), hbar(y / a_max)) <= 2.95 + 1.5 rho on every cell.

    Rows of constant beta run on the worker pool. ``beta_slab = (lo, hi)``
    keeps only the rows with lo <= beta < hi.
    """
    _check_step(step)
    rows = list(range(_steps(BETA_TOP, step)))
    if beta_slab is not None:
        lo, hi = beta_slab
        rows = [bi for bi in rows if lo - TOLERANCE <= bi * step < hi - TOLERANCE]
        if not rows:
            raise InfeasibleParameterError(f"beta slab {beta_slab} holds no grid rows")
    results = run_parallel(lambda bi: _appendix_row(bi, step), rows, threads)
    worst, cell, _, _ = max(results, key=lambda row: row[0])
    cells = sum(row[2] for row in results)
    failures = sum(row[3] for row in results)
    return _summary("Appendix grid", worst, cell, cells, failures)


def large_delta_check(step: float = 0.01) -> Dict[str, Any]:
    """
    2 + a * hbar(1 / a) <= 3 + 1.5 rho for beta in [0, 1], delta in [3/2, 6], rho in [0, 2.1].

    a is affine in rho and the slack is concave in a, so each (beta, delta)
    column is evaluated at its end points and at the two grid rho values
    around its stationary point. ``failures`` counts failing columns.
    """
    beta = np.arange(0, _steps(BETA_TOP, step) + 1) * step
    delta = np.arange(_steps(DELTA_TOP, step), _steps(LARGE_DELTA_TOP, step) + 1) * step
    top = _steps(RHO_TOP, step)
    bb, dd = np.meshgrid(beta, delta, indexing="ij")
    scale = (3.0 - bb + dd) ** 2 / ((2.0 - bb + dd) ** 2 * (2.0 + dd))
    c = (dd + 2.0) / (3.0 - bb + dd) ** 2
    inverse_square = TARGET_RHO / (scale * c) - (5.0 - 2.0 * bb + 2.0 * dd)
    with np.errstate(divide="ignore", invalid="ignore"):
        peak = np.where(
            inverse_square > 0,
            1.0 / (np.sqrt(inverse_square) * scale) - (2.0 - bb + dd),
            np.inf,
        )
    peak_index = np.clip(np.floor(peak / step), 0, top)

    worst = np.full(bb.shape, -np.inf)
    worst_rho = np.zeros(bb.shape)
    for index in (0.0, peak_index, np.minimum(peak_index + 1, top), float(top)):
        rho = index * step
        a = scale * (2.0 - bb + dd + rho)
        slack = 2.0 + a * _hbar_array(1.0 / a, bb, dd) - 3.0 - TARGET_RHO * rho
        better = slack > worst
        worst = np.where(better, slack, worst)
        worst_rho = np.where(better, rho, worst_rho)

    at = np.unravel_index(int(np.argmax(worst)), worst.shape)
    cell = {"beta": float(bb[at]), "delta": float(dd[at]), "rho": float(worst_rho[at])}
    return _summary(
        "Large-delta check",
        float(worst[at]),
        cell,
        int(bb.size * (top + 1)),
        int(np.count_nonzero(worst > 0)),
    )


def _beta_delta_grid(step: float, beta_top: float, delta_top: float):
    """Grid points with delta >= beta and delta > 0."""
    beta = np.arange(0, _steps(beta_top, step) + 1) * step
    delta = np.arange(1, _steps(delta_top, step) + 1) * step
    bb, dd = np.meshgrid(beta, delta, indexing="ij")
    keep = dd >= bb - TOLERANCE
    return bb[keep], dd[keep]


def hbar_min_check(step: float = 0.01) -> Dict[str, Any]:
    """10/9 <= hbar(0) <= 20/9 for delta >= beta, and hbar(0) <= 2 when beta <= 3/2."""
    beta, delta = _beta_delta_grid(step, 2.0, LARGE_DELTA_TOP)
    values = _hbar_array(0.0, beta, delta)
    low, high = float(values.min()), float(values.max())
    moderate = values[beta <= 1.5 + TOLERANCE]
    high_moderate = float(moderate.max())
    passed = (
        low >= 10.0 / 9.0 - TOLERANCE
        and high <= 20.0 / 9.0 + TOLERANCE
        and high_moderate <= 2.0 + TOLERANCE
    )
    logger.info("hbar(0) range [%.6g, %.6g]", low, high)
    return {
        "min": low,
        "max": high,
        "max_beta_le_1_5": high_moderate,
        "points": int(values.size),
        "passed": passed,
    }


def _x_candidates(beta, step: float) -> List[Any]:
    """
    Grid x values at the ends of [0, 1] and on both sides of beta.

    h' is constant below beta and increasing above it, and hbar' is linear,
    so their extremes over the x grid are among these points.
    """
    top = _steps(1.0, step)
    first_above = np.clip(np.ceil(beta / step - 1e-9), 0, top)
    last_below = np.clip(first_above - 1, 0, top)
    return [
        np.zeros_like(beta),
        last_below * step,
        first_above * step,
        np.full_like(beta, top * step),
    ]


def derivative_check(step: float = 0.01) -> Dict[str, Any]:
    """-2 <= h' <= -4/3 and -4 < hbar' < 0 over the (beta, delta, x) grid."""
    beta, delta = _beta_delta_grid(step, 2.0, LARGE_DELTA_TOP)
    h_slopes = [_h_prime_array(x, beta, delta) for x in _x_candidates(beta, step)]
    hbar_slopes = [_hbar_prime_array(x, beta, delta) for x in _x_candidates(beta, step)]
    report = {
        "h_prime": {
            "min": min(float(s.min()) for s in h_slopes),
            "max": max(float(s.max()) for s in h_slopes),
        },
        "hbar_prime": {
            "min": min(float(s.min()) for s in hbar_slopes),
            "max": max(float(s.max()) for s in hbar_slopes),
        },
    }
    report["h_prime"]["passed"] = bool(
        report["h_prime"]["min"] >= -2.0 - TOLERANCE
        and report["h_prime"]["max"] <= -4.0 / 3.0 + TOLERANCE
    )
    report["hbar_prime"]["passed"] = bool(
        report["hbar_prime"]["min"] > -4.0 and report["hbar_prime"]["max"] < 0.0
    )
    report["passed"] = report["h_prime"]["passed"] and report["hbar_prime"]["passed"]
    return report


def hbar_below_h_check(step: float = 0.01) -> Dict[str, Any]:
    """
    hbar(x) <= h(x) for beta in [0, 1], delta in [beta, 3/2], x in [0, 1].

    hbar - h is concave on [0, beta) and on [beta, 1], so besides the
    candidates of ``_x_candidates`` only the grid points around the
    stationary point of the lower piece need checking.
    """
    beta, delta = _beta_delta_grid(step, BETA_TOP, DELTA_TOP)
    top = _steps(1.0, step)
    stationary = (3.0 - beta + delta) ** 2 / (delta + 2.0) - (2.0 - beta + delta)
    below = np.clip(np.floor(stationary / step), 0, top)
    candidates = _x_candidates(beta, step) + [below * step, np.minimum(below + 1, top) * step]

    worst = np.full(beta.shape, -np.inf)
    worst_x = np.zeros(beta.shape)
    for x in candidates:
        gap = _hbar_array(x, beta, delta) - _h_array(x, beta, delta)
        better = gap > worst
        worst = np.where(better, gap, worst)
        worst_x = np.where(better, x, worst_x)

    at = int(np.argmax(worst))
    gap_max = float(worst[at])
    return {
        "worst_gap": gap_max,
        "worst_point": {
            "beta": float(beta[at]),
            "delta": float(delta[at]),
            "x": float(worst_x[at]),
        },
        "points": int(beta.size * (top + 1)),
        "passed": gap_max <= TOLERANCE,
    }


def grid_verify_appendix(step: float = 0.001, threads: int = 1) -> Dict[str, Any]:
    """
    Runs every grid check and reports each one's worst slack.

    The main grid covers beta in [0, 1), delta from beta - step up to 3/2
    and rho in [0, 2.1]; for each cell y balances h(y) against
    hbar(y / a_max) at the cell's upper corner.
    """
    _check_step(step)
    checks: Dict[str, Any] = {
        "appendix_grid": appendix_grid_check(step, threads),
        "large_delta": large_delta_check(step),
        "hbar_min": hbar_min_check(step),
        "derivatives": derivative_check(step),
        "hbar_below_h": hbar_below_h_check(step),
    }
    failed: List[str] = [name for name, result in checks.items() if not result["passed"]]
    if failed:
        logger.warning("Grid checks failed: %s", ", ".join(failed))
    return {"step": step, **checks, "passed": not failed}

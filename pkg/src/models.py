"""
Data models for the relcut reliability estimator.

Plain value types shared by the algorithms, the oracle and the CLI. Vertex
identifiers are 1-indexed original-graph labels throughout.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from src.errors import InfeasibleParameterError


class Branch(str, Enum):
    """Which estimator the pipeline ran."""

    MONTE_CARLO = "monte-carlo"
    CUT_ENUMERATION = "cut-enumeration"


@dataclass(frozen=True)
class Cut:
    """
    A cut of the original graph.

    The shore always contains vertex 1, so two cuts are equal exactly when
    their shores are equal.
    """

    shore: FrozenSet[int]
    weight: int

    def other_side(self, n: int) -> FrozenSet[int]:
        """Vertices of the original graph not on the shore."""
        return frozenset(range(1, n + 1)) - self.shore


@dataclass(frozen=True)
class Trajectory:
    """
    One recorded run of the Contraction Algorithm or Contraction Process.

    ``edges`` lists the contracted pairs in order, each identified by the
    smallest original vertex of the two merged groups. ``edge_counts`` maps
    every vertex count r visited (from n down to ``stop``) to the number of
    edges present at that point.
    """

    seed: int
    alpha: float
    n: int
    edges: Tuple[Tuple[int, int], ...]
    edge_counts: Dict[int, int]
    stop: int
    selected: Optional[Cut] = None
    bottom: bool = False


@dataclass(frozen=True)
class PotentialS:
    """Potential values S_i for i between the trajectory stop and n."""

    stop: int
    n: int
    values: Dict[int, float]

    def at(self, i: int) -> float:
        """Returns S_i, rejecting indices outside the recorded range."""
        if i < self.stop or i > self.n:
            raise InfeasibleParameterError(
                f"S_{i} requested outside recorded range [{self.stop}, {self.n}]"
            )
        return self.values[i]


@dataclass(frozen=True)
class CutPointer:
    """
    Everything needed to regenerate a cut emitted by a recursive run.

    ``scheme`` is ``"rca"``, ``"rca2"`` or ``"explicit"``; for explicit
    pointers ``run`` is the index into the resolver's shore list.
    """

    seed: int
    run: int
    path: Tuple[int, ...]
    scheme: str
    alpha: float


@dataclass(frozen=True)
class CutRecord:
    """Compact record of a cut: hash id, weight and a regeneration pointer."""

    id: int  # pylint: disable=invalid-name
    weight: int
    pointer: CutPointer


@dataclass
class RcaRun:
    """Output of one recursive contraction run."""

    seed: int
    alpha: float
    scheme: str
    run: int
    depth_limit: int
    depth: int
    node_count: int
    emitted: List[CutRecord] = field(default_factory=list)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one estimator trial."""

    q_index: int
    components: int
    matches: int
    u_hat: float
    checks: int


@dataclass
class Estimate:
    """
    A reliability estimate.

    ``upper_bound`` is set when Monte Carlo saw no disconnection; ``value``
    is then 0.0 and the bound is the one-sided 95% rule-of-three limit.
    """

    value: float
    rel_std: float
    trials: int
    method: Branch
    seed: int
    aborts: int = 0
    upper_bound: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ReliabilityParams:
    """
    Parameters derived from (G, p, eps).

    ``alpha_star_max`` is None when delta <= 0: the cut-enumeration
    analysis does not apply there.
    """

    p: float
    eps: float
    n: int
    m: int
    c: int
    delta: float
    rho: float
    K: float  # pylint: disable=invalid-name
    alpha_star_max: Optional[float]
    beta_diag: Optional[float] = None


@dataclass(frozen=True)
class OracleLimits:
    """Size caps for the exhaustive oracles."""

    max_m_subsets: int = 22
    max_n_cuts: int = 20
    max_n_exact_ca: int = 6

    def __post_init__(self) -> None:
        for name in ("max_m_subsets", "max_n_cuts", "max_n_exact_ca"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InfeasibleParameterError(
                    f"{name} must be a positive integer, got {value!r}"
                )


@dataclass(frozen=True)
class GateOutcome:
    """Evidence behind a gate decision."""

    branch: Branch
    samples: int
    budget: int
    disconnections: int

    def as_dict(self) -> Dict[str, Any]:
        """Evidence in the shape the CLI reports."""
        return {
            "branch": self.branch.value,
            "samples": self.samples,
            "budget": self.budget,
            "disconnections": self.disconnections,
        }

"""
Exception hierarchy for relcut.

Each error carries the CLI exit code it maps to.
"""


class RelcutError(Exception):
    """Base class for all relcut errors."""

    exit_code = 2


class GraphFormatError(RelcutError):
    """The graph file is malformed."""

    exit_code = 1


class DisconnectedGraphError(RelcutError):
    """The input graph is not connected."""

    exit_code = 2


class InfeasibleParameterError(RelcutError):
    """A parameter is outside the range an operation accepts."""

    exit_code = 2


class CapExceededError(RelcutError):
    """An exhaustive oracle was asked for an instance above its size cap."""

    exit_code = 2


class ReconstructionError(RelcutError):
    """Replaying a cut pointer did not reproduce the recorded cut."""

    exit_code = 3


class InvariantViolation(RelcutError):
    """An internal consistency check failed."""

    exit_code = 3

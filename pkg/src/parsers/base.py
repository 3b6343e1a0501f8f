"""
Base classes and interfaces for graph parsers.

This module defines the contract that all graph parsers must follow.
"""

from typing import Protocol

from src.algorithms.multigraph import MultiGraph


class GraphParser(Protocol):
    """
    Protocol for graph parsers.

    Classes implementing this protocol turn the text of a graph description
    into a connected MultiGraph with singleton vertex groups.
    """

    def parse(self, text: str) -> MultiGraph:
        """Parses a graph description."""

"""
Graph-file parser implementation.

Format (UTF-8 text): lines starting with '#' are comments, the first other
line is ``graph <n>``, then one ``edge <u> <v> <mult>`` line per adjacent
pair.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from src.algorithms.multigraph import MAX_MULTIPLICITY, MultiGraph
from src.errors import DisconnectedGraphError, GraphFormatError
from src.parsers.base import GraphParser

logger = logging.getLogger(__name__)


class GraphFileParser(GraphParser):
    """Parses the line-oriented graph file format."""

    def _int_field(self, token: str, lineno: int, what: str) -> int:
        """Parses a decimal integer field, reporting the line on failure."""
        try:
            return int(token, 10)
        except ValueError as e:
            raise GraphFormatError(f"line {lineno}: {what} {token!r} is not an integer") from e

    def _parse_header(self, tokens: List[str], lineno: int) -> int:
        if len(tokens) != 2 or tokens[0] != "graph":
            raise GraphFormatError(f"line {lineno}: expected 'graph <n>'")
        n = self._int_field(tokens[1], lineno, "vertex count")
        if n < 2:
            raise GraphFormatError(f"line {lineno}: a graph needs at least 2 vertices")
        return n

    def _parse_edge(self, tokens: List[str], lineno: int, n: int) -> Tuple[int, int, int]:
        if len(tokens) != 4 or tokens[0] != "edge":
            raise GraphFormatError(f"line {lineno}: expected 'edge <u> <v> <mult>'")
        u = self._int_field(tokens[1], lineno, "vertex")
        v = self._int_field(tokens[2], lineno, "vertex")
        k = self._int_field(tokens[3], lineno, "multiplicity")
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphFormatError(f"line {lineno}: vertex index out of range 1..{n}")
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop at vertex {u}")
        if k < 1 or k > MAX_MULTIPLICITY:
            raise GraphFormatError(f"line {lineno}: multiplicity {k} out of range")
        return min(u, v), max(u, v), k

    def parse(self, text: str) -> MultiGraph:
        """Parses graph-file content into a MultiGraph."""
        n = 0
        declared: Dict[Tuple[int, int], int] = {}
        edges: List[Tuple[int, int, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if n == 0:
                n = self._parse_header(tokens, lineno)
                continue
            u, v, k = self._parse_edge(tokens, lineno, n)
            if (u, v) in declared:
                raise GraphFormatError(
                    f"line {lineno}: pair ({u}, {v}) already declared on line {declared[(u, v)]}"
                )
            declared[(u, v)] = lineno
            edges.append((u, v, k))

        if n == 0:
            raise GraphFormatError("missing 'graph <n>' header")

        mult = np.zeros((n, n), dtype=np.int64)
        for u, v, k in edges:
            mult[u - 1, v - 1] = k
            mult[v - 1, u - 1] = k
        graph = MultiGraph(mult)
        if not graph.is_connected():
            raise DisconnectedGraphError("graph is disconnected, so U(p) = 1 trivially")
        logger.debug("Parsed graph with n=%d, m=%d", graph.n, graph.m)
        return graph


def parse_graph(text: str) -> MultiGraph:
    """Parses graph-file content."""
    return GraphFileParser().parse(text)


def load_graph(path: Union[str, Path]) -> MultiGraph:
    """Reads and parses a graph file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise GraphFormatError(f"cannot read graph file {path}: {e}") from e
    return parse_graph(text)


def format_graph(graph: MultiGraph, comment: str = "") -> str:
    """Renders a graph in the file format."""
    lines = [f"# {comment}"] if comment else []
    lines.append(f"graph {graph.n}")
    lines.extend(f"edge {u} {v} {k}" for u, v, k in graph.edges())
    return "\n".join(lines) + "\n"

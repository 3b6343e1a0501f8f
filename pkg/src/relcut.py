"""
relcut command-line interface.

Subcommands: estimate, mincut, cuts, oracle, verify-bounds, bench. Every
subcommand prints one JSON document on stdout; logs go to stderr.
"""

import argparse
import json
import logging
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.algorithms.cutstore import save_collection
from src.algorithms.multigraph import MultiGraph, canonical_shore, make_cut, min_cut
from src.algorithms.rca import (
    default_table,
    enumerate_alpha_cuts,
    run_rca,
    run_rca2,
    tree_node_count,
)
from src.analysis import bounds, oracle
from src.analysis.families import build_family
from src.config import PipelineConfig, load_config
from src.errors import InfeasibleParameterError, RelcutError
from src.parsers.graph_file import load_graph
from src.pipeline import estimate_document, estimate_unreliability
from src.rng import random_seed

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _encode(value: Any) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return format(number, ".17g") if math.isfinite(number) else "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return json.dumps(f"{value.numerator}/{value.denominator}")
    if isinstance(value, dict):
        items = (f"{json.dumps(str(k))}: {_encode(v)}" for k, v in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    return json.dumps(value)


def _parse_seed(text: str) -> Optional[int]:
    if text == "random":
        return random_seed()
    try:
        seed = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random': {text}") from e
    if seed < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return seed


def _parse_shore(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"cut must be comma-separated vertices: {text}") from e


def _add_graph_args(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="graph file")
    source.add_argument("--family", help="built-in family, e.g. cycle:6 or odd-cycle:5,3")


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=_parse_seed, help="integer seed or 'random'")
    parser.add_argument("--threads", type=int, help="worker threads")
    parser.add_argument("--config", help="config file (default config/config.json)")
    parser.add_argument("--output", help="also write the JSON document here")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="warnings only")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for all subcommands."""
    parser = argparse.ArgumentParser(prog="relcut", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    estimate = commands.add_parser("estimate", help="estimate U(p)")
    _add_graph_args(estimate)
    _add_common_args(estimate)
    estimate.add_argument("--p", type=float, required=True, help="edge failure probability")
    estimate.add_argument("--eps", type=float, default=0.1, help="relative error")
    estimate.add_argument("--K", type=float, dest="K", help="gate exponent")
    estimate.add_argument("--phi", type=float, help="gate sample factor")
    estimate.add_argument("--lambda", type=float, dest="lam", help="estimator trial factor")
    estimate.add_argument("--c-pipe", type=float, dest="c_pipe", help="RCA run factor")
    estimate.add_argument("--c-mc", type=float, dest="c_mc", help="Monte Carlo budget factor")
    estimate.add_argument("--force-branch", choices=["mc", "cuts"], dest="force_branch")

    mincut = commands.add_parser("mincut", help="minimum cut")
    _add_graph_args(mincut)
    _add_common_args(mincut)

    cuts = commands.add_parser("cuts", help="enumerate alpha-cuts with RCA")
    _add_graph_args(cuts)
    _add_common_args(cuts)
    cuts.add_argument("--alpha", type=Fraction, required=True, help="cut-size factor")
    cuts.add_argument("--c-enum", type=float, dest="c_enum", help="run-count factor")
    cuts.add_argument("--p", type=float, default=0.5, help="p the collection is built for")
    cuts.add_argument("--save", help="write the cut collection in binary form")

    exact = commands.add_parser("oracle", help="exact brute-force quantities")
    _add_graph_args(exact)
    _add_common_args(exact)
    exact.add_argument(
        "--what", required=True, choices=["exact-u", "zbar", "alpha-cuts", "ca-prob", "tail"]
    )
    exact.add_argument("--p", type=float, default=0.5)
    exact.add_argument("--alpha", type=Fraction, default=Fraction(1))
    exact.add_argument("--cut", type=_parse_shore, help="shore for ca-prob, e.g. 1,2")
    exact.add_argument("--trials", type=int, default=10000, help="samples for tail")

    verify = commands.add_parser("verify-bounds", help="grid checks of the bound functions")
    _add_common_args(verify)
    verify.add_argument("--step", type=float, dest="grid_step", help="grid step")

    bench = commands.add_parser("bench", help="RCA node counts over doubling n")
    _add_common_args(bench)
    bench.add_argument("--scheme", choices=["rca", "rca2"], default="rca2")
    bench.add_argument("--alpha", type=Fraction, default=Fraction(3, 2))
    bench.add_argument("--sizes", type=_parse_shore, default=[16, 32, 64, 128])
    bench.add_argument("--runs", type=int, default=3)
    bench.add_argument("--base-family", default="cycle", dest="base_family")
    return parser


class RelcutCli:
    """Dispatches one parsed command line."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        overrides = {
            name: getattr(args, name, None)
            for name in ("K", "phi", "lam", "c_pipe", "c_enum", "c_mc", "threads", "grid_step")
        }
        overrides["force_branch"] = getattr(args, "force_branch", None)
        config_file = str(Path(args.config).resolve()) if args.config else "../config/config.json"
        self.config = PipelineConfig.from_sources(load_config(config_file), None, overrides)
        self.seed = args.seed if args.seed is not None else self.config.seed

    def load_graph(self) -> MultiGraph:
        """Reads --graph or builds --family."""
        if self.args.graph:
            return load_graph(self.args.graph)
        return build_family(self.args.family)

    def _estimate(self, graph: MultiGraph) -> Dict[str, Any]:
        estimate = estimate_unreliability(
            graph, self.args.p, self.args.eps, self.seed, self.config
        )
        return estimate_document(estimate)

    def _mincut(self, graph: MultiGraph) -> Dict[str, Any]:
        c, cut = min_cut(graph)
        return {"n": graph.n, "m": graph.m, "c": c, "shore": sorted(cut.shore)}

    def _cuts(self, graph: MultiGraph) -> Dict[str, Any]:
        alpha = self.args.alpha
        table = default_table(graph, alpha, self.seed, self.config.hash_phi)
        collection = enumerate_alpha_cuts(
            graph,
            alpha,
            self.seed,
            c_enum=self.config.c_enum,
            p=self.args.p,
            table=table,
            threads=self.config.threads,
        )
        if self.args.save:
            save_collection(collection, self.args.save)
            logger.info("Saved %d cuts to %s", len(collection), self.args.save)
        resolver = collection.resolver
        records = []
        for record in collection.records:
            shore = resolver.shore(record.pointer, graph) if resolver else frozenset()
            records.append({"id": record.id, "weight": record.weight, "shore": sorted(shore)})
        c, _ = min_cut(graph)
        return {
            "alpha": float(alpha),
            "c": c,
            "hash_bits": table.b,
            "count": len(collection),
            "weight_histogram": collection.weight_histogram(),
            "cuts": records,
        }

    def _oracle(self, graph: MultiGraph) -> Dict[str, Any]:
        what = self.args.what
        limits = self.config.oracle
        result: Dict[str, Any] = {"what": what}
        if what == "exact-u":
            result.update(p=self.args.p, value=oracle.exact_U(graph, self.args.p, limits))
        elif what == "zbar":
            result.update(p=self.args.p, value=oracle.zbar(graph, self.args.p, limits))
        elif what == "alpha-cuts":
            cuts = oracle.enumerate_alpha_cuts_bruteforce(graph, self.args.alpha, limits)
            result.update(
                alpha=float(self.args.alpha),
                count=len(cuts),
                cuts=[{"weight": cut.weight, "shore": sorted(cut.shore)} for cut in cuts],
            )
        elif what == "ca-prob":
            if not self.args.cut:
                raise InfeasibleParameterError("--cut is required for ca-prob")
            cut = make_cut(graph, canonical_shore(self.args.cut, graph.orig_n))
            prob = oracle.exact_ca_selection_prob(graph, cut, self.args.alpha, limits)
            result.update(
                alpha=float(self.args.alpha),
                shore=sorted(cut.shore),
                weight=cut.weight,
                exact=prob,
                value=float(prob),
            )
        else:
            result.update(oracle.component_tail(graph, self.args.p, self.args.trials, self.seed))
        return result

    def _verify_bounds(self) -> Dict[str, Any]:
        return bounds.grid_verify_appendix(self.config.grid_step, self.config.threads)

    def _bench(self) -> Dict[str, Any]:
        runner: Callable[..., Any] = run_rca2 if self.args.scheme == "rca2" else run_rca
        rows = []
        for n in self.args.sizes:
            graph = build_family(f"{self.args.base_family}:{n}")
            table = default_table(graph, self.args.alpha, self.seed, self.config.hash_phi)
            started = time.perf_counter()
            nodes = [
                runner(graph, self.args.alpha, self.seed, run=run, table=table).node_count
                for run in range(self.args.runs)
            ]
            elapsed = time.perf_counter() - started
            rows.append(
                {
                    "n": n,
                    "mean_nodes": float(np.mean(nodes)),
                    "tree_nodes": tree_node_count(self.args.scheme, n, self.args.alpha),
                    "seconds": elapsed / self.args.runs,
                }
            )
            logger.info("n=%d: %.1f nodes per run", n, rows[-1]["mean_nodes"])
        slope = None
        if len(rows) >= 2:
            xs = np.log([row["n"] for row in rows])
            ys = np.log([row["mean_nodes"] for row in rows])
            slope = float(np.polyfit(xs, ys, 1)[0])
        return {
            "scheme": self.args.scheme,
            "alpha": float(self.args.alpha),
            "rows": rows,
            "slope": slope,
        }

    def run(self) -> Dict[str, Any]:
        """Runs the selected subcommand and returns its JSON document."""
        command = self.args.command
        graph_commands = {
            "estimate": self._estimate,
            "mincut": self._mincut,
            "cuts": self._cuts,
            "oracle": self._oracle,
        }
        body: Dict[str, Any]
        if command in graph_commands:
            try:
                graph = self.load_graph()
            except RelcutError as e:
                raise GraphLoadError(e) from e
            body = graph_commands[command](graph)
        elif command == "verify-bounds":
            body = self._verify_bounds()
        else:
            body = self._bench()
        return {"schema_version": SCHEMA_VERSION, "command": command, "seed": self.seed, **body}


class GraphLoadError(Exception):
    """Any failure while reading or building the input graph."""

    exit_code = 1

    def __init__(self, cause: RelcutError):
        super().__init__(str(cause))
        self.cause = cause


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    logging.getLogger().setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        document = RelcutCli(args).run()
    except GraphLoadError as e:
        logger.error("Could not load graph: %s", e)
        return e.exit_code
    except RelcutError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code

    text = _encode(document)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Unit tests for the recursive contraction runs."""

import unittest
from collections import Counter
from dataclasses import replace

import numpy as np
from scipy import stats

from src.algorithms.contraction import run_ca
from src.algorithms.cutstore import HashTable, contains, cut_id
from src.algorithms.rca import (
    ReplayResolver,
    alpha_cut_run_count,
    collect_runs,
    default_table,
    enumerate_alpha_cuts,
    rca_iteration_budget,
    reconstruct,
    replay,
    run_rca,
    run_rca2,
    tree_depth,
    tree_node_count,
    uses_rca2,
)
from src.analysis.families import complete_graph, cycle_graph, desk_corpus
from src.analysis.oracle import enumerate_alpha_cuts_bruteforce
from src.errors import InfeasibleParameterError, ReconstructionError
from src.models import CutPointer


class TestRunRca(unittest.TestCase):
    def setUp(self):
        self.graph = cycle_graph(6)
        self.table = default_table(self.graph, 1, seed=7)

    def test_tree_shape(self):
        result = run_rca(self.graph, 1, seed=7, table=self.table)
        self.assertEqual(tree_depth("rca", 6, 1), 2)
        self.assertEqual(result.depth, 2)
        self.assertEqual(result.node_count, 1 + 4 + 16)
        self.assertEqual(len(result.emitted), 16)

    def test_single_branch(self):
        result = run_rca(self.graph, 1, seed=7, table=self.table, branching=1)
        self.assertEqual(result.node_count, 3)
        self.assertEqual(len(result.emitted), 1)
        with self.assertRaises(InfeasibleParameterError):
            run_rca(self.graph, 1, seed=7, table=self.table, branching=0)

    def test_every_record_reconstructs(self):
        result = run_rca(self.graph, 1, seed=3, run=5, table=self.table)
        for record in result.emitted:
            cut = reconstruct(record, self.graph, self.table)
            self.assertEqual(cut.weight, record.weight)
            self.assertIn(1, cut.shore)
            self.assertEqual(record.pointer.run, 5)

    def test_tampered_record_is_rejected(self):
        record = run_rca(self.graph, 1, seed=3, table=self.table).emitted[0]
        with self.assertRaises(ReconstructionError):
            reconstruct(replace(record, weight=record.weight + 1), self.graph, self.table)
        with self.assertRaises(ReconstructionError):
            reconstruct(replace(record, id=record.id ^ 1), self.graph, self.table)

    def test_replay_rejects_bad_paths(self):
        too_deep = CutPointer(seed=1, run=0, path=(0, 0, 0), scheme="rca", alpha=1.0)
        with self.assertRaises(ReconstructionError):
            replay(too_deep, self.graph)
        too_short = CutPointer(seed=1, run=0, path=(0,), scheme="rca", alpha=1.0)
        with self.assertRaises(ReconstructionError):
            replay(too_short, self.graph)
        explicit = CutPointer(seed=1, run=0, path=(), scheme="explicit", alpha=1.0)
        with self.assertRaises(ReconstructionError):
            replay(explicit, self.graph)

    def test_resolver_caches_shores(self):
        record = run_rca(self.graph, 1, seed=3, table=self.table).emitted[0]
        resolver = ReplayResolver()
        first = resolver.shore(record.pointer, self.graph)
        self.assertIs(resolver.shore(record.pointer, self.graph), first)


class TestRunRca2(unittest.TestCase):
    def test_range_check(self):
        with self.assertRaises(InfeasibleParameterError):
            run_rca2(cycle_graph(8), 1, seed=0)
        with self.assertRaises(InfeasibleParameterError):
            run_rca2(cycle_graph(8), 3, seed=0)
        self.assertTrue(uses_rca2(8, "3/2"))
        self.assertFalse(uses_rca2(8, 3))

    def test_tree_shape(self):
        graph = cycle_graph(8)
        table = default_table(graph, "3/2", seed=2)
        result = run_rca2(graph, "3/2", seed=2, table=table)
        # 8 -> 7 -> 6 -> 5 -> 4 -> 3, each step capped at r - 1.
        self.assertEqual(tree_depth("rca2", 8, "3/2"), 5)
        self.assertEqual(result.depth, 5)
        self.assertEqual(len(result.emitted), 2**5)
        self.assertEqual(result.node_count, 2**6 - 1)
        for record in result.emitted[:4]:
            self.assertEqual(reconstruct(record, graph, table).weight, record.weight)


class TestRunCounts(unittest.TestCase):
    def test_iteration_budget(self):
        self.assertEqual(rca_iteration_budget(10, 0.5), 4000)
        self.assertEqual(rca_iteration_budget(10, 0.5, c_pipe=0.5), 2000)
        with self.assertRaises(InfeasibleParameterError):
            rca_iteration_budget(10, 0.6)
        with self.assertRaises(InfeasibleParameterError):
            rca_iteration_budget(1, 0.1)

    def test_alpha_cut_run_count(self):
        # n <= ceil(2 alpha): one cut, so only the miss-rate term remains.
        self.assertEqual(alpha_cut_run_count(2, 1), 14)
        self.assertLess(alpha_cut_run_count(20, 1), alpha_cut_run_count(20, 2))
        self.assertGreater(alpha_cut_run_count(20, 1, c_enum=2), alpha_cut_run_count(20, 1))

    def test_collect_runs_independent_of_threads(self):
        graph = complete_graph(5)
        table = default_table(graph, 1, seed=4)
        single, nodes_single = collect_runs(graph, 1, 4, 130, table, threads=1)
        pooled, nodes_pooled = collect_runs(graph, 1, 4, 130, table, threads=3)
        self.assertEqual(single, pooled)
        self.assertEqual(nodes_single, nodes_pooled)
        self.assertEqual(len({r.id for r in single}), len(single))


class TestEnumerateAlphaCuts(unittest.TestCase):
    def test_finds_every_min_cut_of_the_six_cycle(self):
        graph = cycle_graph(6)
        collection = enumerate_alpha_cuts(graph, 1, seed=12)
        expected = enumerate_alpha_cuts_bruteforce(graph, 1)
        self.assertEqual(len(expected), 15)
        self.assertEqual(len(collection), 15)
        for cut in expected:
            self.assertTrue(contains(collection, cut, graph))
        self.assertFalse(contains(collection, {1, 3}, graph))

    def test_drops_cuts_above_alpha_c(self):
        graph = complete_graph(4)
        collection = enumerate_alpha_cuts(graph, "3/2", seed=5, table=HashTable.create(4, 7, 5))
        self.assertEqual(collection.weight_histogram(), {3: 4, 4: 3})
        collection = enumerate_alpha_cuts(graph, 1, seed=5)
        self.assertEqual(collection.weight_histogram(), {3: 4})


class TestTreeSize(unittest.TestCase):
    def test_node_count_matches_the_runs(self):
        self.assertEqual(tree_node_count("rca", 6, 1), 21)
        self.assertEqual(tree_node_count("rca", 2, 1), 1)
        for n in (8, 10, 12):
            graph = cycle_graph(n)
            table = default_table(graph, "3/2", seed=n)
            result = run_rca2(graph, "3/2", seed=n, table=table)
            self.assertEqual(result.node_count, tree_node_count("rca2", n, "3/2"))

    def test_rca2_tree_grows_as_n_to_five_halves(self):
        sizes = [32, 64, 128, 256, 512]
        nodes = [tree_node_count("rca2", n, "3/2") for n in sizes]
        slope = np.polyfit(np.log(sizes), np.log(nodes), 1)[0]
        self.assertLess(abs(slope - 2.5), 0.3)


class TestCutLaw(unittest.TestCase):
    """Test cases for the distribution of cuts a run emits."""

    def test_single_branch_run_matches_the_contraction_algorithm(self):
        graph = complete_graph(4)
        table = default_table(graph, 1, seed=31)
        trials = 600
        tree_shores = Counter()
        ca_shores = Counter()
        for t in range(trials):
            record = run_rca(graph, 1, seed=31, run=t, table=table, branching=1).emitted[0]
            tree_shores[reconstruct(record, graph, table).shore] += 1
            ca_shores[run_ca(graph, 1, seed=31, key=(t,)).selected.shore] += 1
        shores = sorted(set(tree_shores) | set(ca_shores), key=sorted)
        self.assertEqual(len(shores), 7)
        table_counts = [[tree_shores[s] for s in shores], [ca_shores[s] for s in shores]]
        _, p_value, _, _ = stats.chi2_contingency(table_counts)
        self.assertGreater(p_value, 1e-4)

    def test_tree_hits_a_min_cut_more_often_than_one_contraction(self):
        graph = cycle_graph(6)
        table = default_table(graph, 1, seed=8)
        target = cut_id(table, frozenset({1}))
        trials = 600
        tree_hits = sum(
            any(r.id == target for r in run_rca(graph, 1, seed=8, run=t, table=table).emitted)
            for t in range(trials)
        )
        ca_hits = sum(
            run_ca(graph, 1, seed=8, key=(t,)).selected.shore == frozenset({1})
            for t in range(trials)
        )
        self.assertGreaterEqual(tree_hits, ca_hits)
        self.assertGreater(tree_hits / trials, 1 / 15)


class TestEnumerationCompleteness(unittest.TestCase):
    def test_every_alpha_cut_over_the_corpus(self):
        graphs = dict(desk_corpus(), c8=cycle_graph(8))
        for name, graph in graphs.items():
            for alpha in (1, "3/2", 2):
                expected = enumerate_alpha_cuts_bruteforce(graph, alpha)
                for seed in range(5):
                    with self.subTest(graph=name, alpha=alpha, seed=seed):
                        collection = enumerate_alpha_cuts(graph, alpha, seed=seed, c_enum=2.0)
                        self.assertEqual(len(collection), len(expected))
                        for cut in expected:
                            self.assertTrue(contains(collection, cut, graph))


if __name__ == "__main__":
    unittest.main()

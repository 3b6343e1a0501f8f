"""Unit tests for the multigraph primitives."""

import itertools
import unittest
from collections import Counter
from fractions import Fraction

import numpy as np
from scipy import stats

from src.algorithms.multigraph import (
    ContractionState,
    MultiGraph,
    canonical_shore,
    ceil_two_alpha,
    components_after_removal,
    contract_edge,
    contract_set,
    contract_to,
    crossing_matrix,
    cut_weight,
    make_cut,
    min_cut,
)
from src.analysis.families import (
    complete_graph,
    cycle_graph,
    desk_corpus,
    dumbbell_graph,
    two_vertex_graph,
)
from src.analysis.oracle import all_cuts
from src.errors import DisconnectedGraphError, InfeasibleParameterError
from src.rng import Stream, derive_rng


class TestMultiGraph(unittest.TestCase):
    def test_from_edges_accumulates(self):
        graph = MultiGraph.from_edges(3, [(1, 2, 2), (2, 1, 1), (2, 3, 4)])
        self.assertEqual(graph.multiplicity(1, 2), 3)
        self.assertEqual(graph.m, 7)
        self.assertEqual(graph.degree(2), 7)
        self.assertEqual(graph.edges(), [(1, 2, 3), (2, 3, 4)])

    def test_rejects_bad_matrices(self):
        with self.assertRaises(InfeasibleParameterError):
            MultiGraph(np.array([[0, 1], [2, 0]]))
        with self.assertRaises(InfeasibleParameterError):
            MultiGraph(np.array([[1, 1], [1, 0]]))
        with self.assertRaises(InfeasibleParameterError):
            MultiGraph.from_edges(2, [(1, 1, 1)])

    def test_matrix_is_read_only(self):
        graph = cycle_graph(4)
        with self.assertRaises(ValueError):
            graph.mult[0, 1] = 5

    def test_ceil_two_alpha_is_exact(self):
        self.assertEqual(ceil_two_alpha(1), 2)
        self.assertEqual(ceil_two_alpha(1.5), 3)
        self.assertEqual(ceil_two_alpha("4/3"), 3)
        self.assertEqual(ceil_two_alpha(Fraction(3, 2)), 3)
        self.assertEqual(ceil_two_alpha(1.1), 3)
        with self.assertRaises(InfeasibleParameterError):
            ceil_two_alpha(0.9)


class TestContraction(unittest.TestCase):
    def test_contract_edge_merges_groups(self):
        graph = cycle_graph(4)
        merged = contract_edge(graph, 2, 3)
        self.assertEqual(merged.n, 3)
        self.assertEqual(merged.m, 3)
        self.assertEqual(merged.groups[1], frozenset({2, 3}))
        self.assertEqual(merged.multiplicity(1, 2), 1)
        self.assertEqual(merged.multiplicity(2, 3), 1)

    def test_contract_edge_drops_parallel_loops(self):
        graph = MultiGraph.from_edges(3, [(1, 2, 3), (2, 3, 1), (1, 3, 2)])
        merged = contract_edge(graph, 1, 2)
        self.assertEqual(merged.n, 2)
        self.assertEqual(merged.multiplicity(1, 2), 3)

    def test_contract_edge_requires_adjacency(self):
        with self.assertRaises(InfeasibleParameterError):
            contract_edge(cycle_graph(4), 1, 3)

    def test_contract_set_skips_loops(self):
        graph = complete_graph(4)
        merged = contract_set(graph, [(1, 2), (2, 3), (1, 3)])
        self.assertEqual(merged.n, 2)
        self.assertEqual(merged.groups[0], frozenset({1, 2, 3}))
        self.assertEqual(merged.m, 3)

    def test_contract_to_reaches_target(self):
        rng = derive_rng(5, Stream.CONTRACTION)
        small = contract_to(cycle_graph(8), 3, rng)
        self.assertEqual(small.n, 3)
        self.assertEqual(sorted(v for g in small.groups for v in g), list(range(1, 9)))


class TestCuts(unittest.TestCase):
    def test_canonical_shore(self):
        self.assertEqual(canonical_shore({2, 3}, 4), frozenset({1, 4}))
        self.assertEqual(canonical_shore({1}, 4), frozenset({1}))
        with self.assertRaises(InfeasibleParameterError):
            canonical_shore({1, 2, 3, 4}, 4)
        with self.assertRaises(InfeasibleParameterError):
            canonical_shore(set(), 4)

    def test_cut_weight(self):
        graph = cycle_graph(6)
        self.assertEqual(cut_weight(graph, {1, 2, 3}), 2)
        self.assertEqual(cut_weight(graph, {1, 3, 5}), 6)
        self.assertEqual(make_cut(graph, {4, 5, 6}), make_cut(graph, {1, 2, 3}))

    def test_side_mask_rejects_split_groups(self):
        merged = contract_edge(cycle_graph(4), 1, 2)
        with self.assertRaises(InfeasibleParameterError):
            merged.side_mask({1, 3})
        self.assertFalse(merged.respects({1, 3}))
        self.assertTrue(merged.respects({1, 2}))

    def test_crossing_matrix(self):
        graph = two_vertex_graph(3)
        self.assertEqual(int(crossing_matrix(graph, {1}).sum()), 6)

    def test_min_cut_values(self):
        self.assertEqual(min_cut(cycle_graph(5))[0], 2)
        self.assertEqual(min_cut(complete_graph(4))[0], 3)
        self.assertEqual(min_cut(two_vertex_graph(3))[0], 3)
        c, cut = min_cut(dumbbell_graph(3))
        self.assertEqual(c, 1)
        self.assertEqual(cut.shore, frozenset({1, 2, 3}))

    def test_min_cut_disconnected(self):
        graph = MultiGraph.from_edges(4, [(1, 2, 1), (3, 4, 1)])
        with self.assertRaises(DisconnectedGraphError):
            min_cut(graph)

    def test_components_after_removal(self):
        graph = cycle_graph(4)
        count, labels = components_after_removal(graph, [(1, 2), (3, 4)])
        self.assertEqual(count, 2)
        self.assertEqual(labels[2], labels[3])
        self.assertNotEqual(labels[1], labels[2])
        with self.assertRaises(InfeasibleParameterError):
            components_after_removal(graph, [(1, 2), (1, 2)])


class TestContractionState(unittest.TestCase):
    def test_pick_edge_is_uniform_over_parallel_edges(self):
        graph = MultiGraph.from_edges(4, [(1, 2, 1), (2, 3, 2), (3, 4, 3)])
        rng = derive_rng(11, Stream.CONTRACTION)
        state = ContractionState(graph)
        draws = Counter(tuple(sorted(state.pick_edge(rng))) for _ in range(6000))
        observed = [draws[(0, 1)], draws[(1, 2)], draws[(2, 3)]]
        self.assertEqual(sum(observed), 6000)
        _, pvalue = stats.chisquare(observed, [1000, 2000, 3000])
        self.assertGreater(pvalue, 1e-4)

    def test_blocked_edges_are_never_picked(self):
        graph = cycle_graph(4)
        blocked = np.zeros_like(graph.mult)
        blocked[0, 1] = blocked[1, 0] = 1
        state = ContractionState(graph, blocked=blocked)
        rng = derive_rng(3, Stream.CONTRACTION)
        self.assertEqual(state.free_m, 3)
        for _ in range(200):
            self.assertNotEqual(tuple(sorted(state.pick_edge(rng))), (0, 1))

    def test_contract_updates_counts(self):
        state = ContractionState(complete_graph(4))
        state.contract(0, 1)
        self.assertEqual(state.n, 3)
        self.assertEqual(state.m, 5)
        self.assertEqual(state.min_degree(), 3)
        frozen = state.freeze()
        self.assertEqual(frozen.n, 3)
        self.assertEqual(frozen.groups[0], frozenset({1, 2}))

    def test_draw_cut_is_uniform(self):
        graph = complete_graph(3)
        rng = derive_rng(17, Stream.CONTRACTION)
        draws = Counter(ContractionState(graph).draw_cut(rng).shore for _ in range(3000))
        self.assertEqual(len(draws), 3)
        for shore in draws:
            self.assertIn(1, shore)
        _, pvalue = stats.chisquare(list(draws.values()))
        self.assertGreater(pvalue, 1e-4)


def random_graph(n, seed):
    """Connected multigraph with multiplicities 0-2 and a spanning path."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.integers(0, 3, size=(n, n)), 1)
    for i in range(n - 1):
        upper[i, i + 1] = max(upper[i, i + 1], 1)
    return MultiGraph(upper + upper.T)


class TestContractionOrder(unittest.TestCase):
    """Test cases for contracting an edge set and the cuts that survive it."""

    def test_contract_set_ignores_order(self):
        graph = random_graph(6, seed=11)
        edges = [(1, 2), (2, 3), (4, 5), (3, 4)]
        reference = contract_set(graph, edges)
        for order in itertools.permutations(edges):
            merged = contract_set(graph, list(order))
            self.assertEqual(merged.groups, reference.groups)
            self.assertTrue(np.array_equal(merged.mult, reference.mult))

    def test_contracted_cuts_are_the_respecting_cuts(self):
        graph = random_graph(7, seed=4)
        merged = contract_set(graph, [(1, 2), (5, 6)])
        merged_cuts = all_cuts(merged)
        respecting = [cut for cut in all_cuts(graph) if merged.respects(cut.shore)]
        self.assertEqual({cut.shore for cut in merged_cuts}, {cut.shore for cut in respecting})
        for cut in merged_cuts:
            self.assertEqual(cut_weight(graph, cut.shore), cut.weight)

    def test_min_cut_matches_brute_force(self):
        graphs = list(desk_corpus().values())
        graphs += [random_graph(n, seed=n * 7) for n in (5, 6, 7, 8)]
        for graph in graphs:
            c, cut = min_cut(graph)
            with self.subTest(n=graph.n, m=graph.m):
                self.assertEqual(c, min(cut.weight for cut in all_cuts(graph)))
                self.assertEqual(cut_weight(graph, cut.shore), c)


if __name__ == "__main__":
    unittest.main()

"""Unit tests for batched failure sampling."""

import math
import unittest

import numpy as np

from src.algorithms.sampling import (
    batch_components,
    count_disconnected,
    sample_survivors,
    single_sample_components,
)
from src.analysis.families import complete_graph, cycle_graph, two_vertex_graph
from src.errors import InfeasibleParameterError
from src.rng import Stream, derive_rng


class TestSampleSurvivors(unittest.TestCase):
    def test_extreme_probabilities(self):
        graph = two_vertex_graph(3)
        rng = derive_rng(0, Stream.MONTE_CARLO)
        self.assertTrue(np.all(sample_survivors(graph, 0.0, rng, 5) == 3))
        self.assertTrue(np.all(sample_survivors(graph, 1.0, rng, 5) == 0))
        self.assertEqual(sample_survivors(cycle_graph(5), 0.5, rng, 7).shape, (7, 5))

    def test_rejects_bad_p(self):
        rng = derive_rng(0, Stream.MONTE_CARLO)
        with self.assertRaises(InfeasibleParameterError):
            sample_survivors(cycle_graph(4), 1.5, rng, 1)


class TestBatchComponents(unittest.TestCase):
    def test_counts_per_sample(self):
        graph = cycle_graph(4)
        rows, cols, mults = graph.pairs()
        removed = {(0, 1), (2, 3)}
        split = np.array(
            [0 if (int(i), int(j)) in removed else int(k) for i, j, k in zip(rows, cols, mults)]
        )
        survivors = np.vstack([mults, np.zeros_like(mults), split])
        counts, labels = batch_components(graph, survivors)
        self.assertEqual(counts.tolist(), [1, 4, 2])
        self.assertEqual(labels[2][1], labels[2][2])
        self.assertNotEqual(labels[2][0], labels[2][1])

    def test_single_sample(self):
        graph = complete_graph(4)
        _, _, mults = graph.pairs()
        count, labels = single_sample_components(graph, mults.copy())
        self.assertEqual(count, 1)
        self.assertEqual(len(set(labels.tolist())), 1)

    def test_disconnection_rate_matches_exact_value(self):
        # Triangle at p = 0.1: U = 3 p^2 (1 - p) + p^3 = 0.028.
        graph = complete_graph(3)
        rng = derive_rng(42, Stream.MONTE_CARLO)
        trials = 40000
        rate = float(np.mean(count_disconnected(graph, 0.1, rng, trials)))
        sigma = math.sqrt(0.028 * 0.972 / trials)
        self.assertLess(abs(rate - 0.028), 5 * sigma)

    def test_parallel_edges_fail_independently(self):
        # Two vertices with two parallel edges disconnect with probability p^2.
        graph = two_vertex_graph(2)
        rng = derive_rng(5, Stream.MONTE_CARLO)
        trials = 20000
        rate = float(np.mean(count_disconnected(graph, 0.5, rng, trials)))
        sigma = math.sqrt(0.25 * 0.75 / trials)
        self.assertLess(abs(rate - 0.25), 5 * sigma)


if __name__ == "__main__":
    unittest.main()

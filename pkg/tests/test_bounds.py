"""Unit tests for the bound functions and grid checks."""

import math
import unittest

import numpy as np

from src.analysis.bounds import (
    alpha_star_bounds,
    appendix_grid_check,
    cut_count_bound,
    derivative_check,
    f_odd,
    f_rel,
    grid_verify_appendix,
    h,
    h_prime,
    hbar,
    hbar_below_h_check,
    hbar_min_check,
    hbar_prime,
    large_delta_check,
    odd_cut_count_bound,
    verify_cell,
)
from src.errors import InfeasibleParameterError


class TestPotentialBounds(unittest.TestCase):
    def test_known_values(self):
        self.assertAlmostEqual(hbar(0.0, 0.0, 2.0), 1.44)
        self.assertAlmostEqual(h(0.0, 0.0, 2.0), 8 * math.log(5 / 4), places=12)
        self.assertAlmostEqual(h(0.0, 0.0, 2.0), 1.785148, places=5)

    def test_endpoints(self):
        for beta, delta in ((0.0, 0.5), (0.4, 1.0), (0.9, 3.0)):
            with self.subTest(beta=beta, delta=delta):
                self.assertAlmostEqual(h(1.0, beta, delta), 0.0)
                self.assertAlmostEqual(hbar(1.0, beta, delta), 0.0)

    def test_large_beta_is_linear(self):
        self.assertAlmostEqual(h(0.25, 1.0, 1.0), 1.5)
        self.assertAlmostEqual(h(0.25, 1.7, 2.0), 1.5)
        self.assertEqual(h_prime(0.5, 1.2, 2.0), -2.0)

    def test_h_is_continuous_at_beta(self):
        self.assertAlmostEqual(h(0.5 - 1e-10, 0.5, 1.0), h(0.5, 0.5, 1.0), places=8)

    def test_derivatives_match_finite_differences(self):
        eps = 1e-6
        for x, beta, delta in ((0.7, 0.3, 1.0), (0.1, 0.3, 1.0), (0.5, 0.0, 0.2)):
            with self.subTest(x=x, beta=beta, delta=delta):
                slope = (h(x + eps, beta, delta) - h(x - eps, beta, delta)) / (2 * eps)
                self.assertAlmostEqual(h_prime(x, beta, delta), slope, places=5)
                slope = (hbar(x + eps, beta, delta) - hbar(x - eps, beta, delta)) / (2 * eps)
                self.assertAlmostEqual(hbar_prime(x, beta, delta), slope, places=5)

    def test_rejects_out_of_range_arguments(self):
        for args in ((1.5, 0.0, 1.0), (0.5, -0.1, 1.0), (0.5, 2.5, 1.0), (0.5, 0.5, 0.0)):
            with self.subTest(args=args):
                with self.assertRaises(InfeasibleParameterError):
                    h(*args)
                with self.assertRaises(InfeasibleParameterError):
                    hbar(*args)


class TestClosedForms(unittest.TestCase):
    def test_alpha_star_bounds(self):
        first, second = alpha_star_bounds(0.0, 2.0, 0.0)
        self.assertAlmostEqual(first, 2.0)
        self.assertAlmostEqual(second, 25 / 16)
        self.assertIsNone(alpha_star_bounds(1.8, 2.0, 0.0)[1])
        with self.assertRaises(InfeasibleParameterError):
            alpha_star_bounds(0.0, 0.0, 0.0)

    def test_f_odd(self):
        self.assertAlmostEqual(f_odd(10, 1000, 0, 3), 1.5 * math.log(100))
        self.assertAlmostEqual(f_odd(10, 1000, 0, 1), math.log(100))
        self.assertAlmostEqual(f_odd(10, 10, 5, 3), 0.0)
        with self.assertRaises(InfeasibleParameterError):
            f_odd(10, 1000, 0, 2)
        with self.assertRaises(InfeasibleParameterError):
            f_odd(2, 1000, 0, 3)
        with self.assertRaises(InfeasibleParameterError):
            f_odd(10, 1000, 2001, 3)

    def test_f_rel(self):
        gamma = 2 * math.log(1000)
        self.assertAlmostEqual(f_rel(100, 1000, 2.0, gamma), 2 * math.log(10))
        self.assertAlmostEqual(f_rel(1000, 1000, 1.0, gamma), 0.0)
        self.assertLess(f_rel(100, 1000, 0.5, gamma), gamma)
        with self.assertRaises(InfeasibleParameterError):
            f_rel(50, 1000, 0.5, gamma)
        with self.assertRaises(InfeasibleParameterError):
            f_rel(100, 1000, 0.5, 1.0)
        with self.assertRaises(InfeasibleParameterError):
            f_rel(100, 1000, 0.0, gamma)

    def test_f_odd_is_increasing_and_concave_in_k(self):
        n, i = 1000, 10
        ks = list(range(0, 2 * n + 1, 50))
        for c in (1, 3, 5):
            values = np.array([f_odd(i, n, k, c) for k in ks])
            with self.subTest(c=c):
                self.assertTrue(np.all(np.diff(values) > 0))
                self.assertTrue(np.all(np.diff(values, 2) <= 1e-12))

    def test_f_rel_is_increasing_and_concave_in_a(self):
        r, i = 1000, 200
        gamma = 3 * math.log(r)
        values = np.array([f_rel(i, r, a, gamma) for a in np.linspace(0.05, 0.95, 19)])
        self.assertTrue(np.all(np.diff(values) > 0))
        self.assertTrue(np.all(np.diff(values, 2) <= 1e-12))

    def test_cut_counts(self):
        self.assertAlmostEqual(cut_count_bound(10, 1), 100.0)
        self.assertAlmostEqual(odd_cut_count_bound(10, 1, 3), 10**1.5)


class TestGridChecks(unittest.TestCase):
    def test_single_cell(self):
        cell = verify_cell(0.0, 1.0, 0.0, step=0.001)
        self.assertTrue(cell["passed"])
        self.assertAlmostEqual(cell["a_max"], 1.778, places=2)
        self.assertAlmostEqual(cell["y"], 0.332, places=2)
        self.assertAlmostEqual(cell["slack"], -0.336, places=2)

    def test_rejects_coarse_steps(self):
        with self.assertRaises(InfeasibleParameterError):
            verify_cell(0.0, 1.0, 0.0, step=0.05)
        with self.assertRaises(InfeasibleParameterError):
            grid_verify_appendix(0.0)

    def test_hbar_range(self):
        result = hbar_min_check(0.01)
        self.assertTrue(result["passed"])
        self.assertAlmostEqual(result["min"], 1.1137, places=3)
        self.assertAlmostEqual(result["max"], 20 / 9, places=6)
        self.assertLessEqual(result["max_beta_le_1_5"], 2.0)

    def test_derivative_ranges(self):
        result = derivative_check(0.01)
        self.assertTrue(result["passed"])
        self.assertAlmostEqual(result["h_prime"]["min"], -2.0)

    def test_hbar_stays_below_h(self):
        result = hbar_below_h_check(0.01)
        self.assertTrue(result["passed"])
        self.assertLessEqual(result["worst_gap"], 1e-12)

    def test_large_delta(self):
        result = large_delta_check(0.01)
        self.assertTrue(result["passed"])
        self.assertLess(result["worst_slack"], 0.0)

    def test_full_grid_at_one_hundredth(self):
        result = grid_verify_appendix(0.01, threads=2)
        self.assertTrue(result["passed"])
        grid = result["appendix_grid"]
        self.assertEqual(grid["failures"], 0)
        self.assertGreater(grid["cells"], 2_000_000)
        self.assertLess(grid["worst_slack"], -0.03)

    def test_fine_slabs(self):
        for slab in ((0.0, 0.002), (0.5, 0.502), (0.997, 0.999)):
            with self.subTest(slab=slab):
                result = appendix_grid_check(0.001, threads=2, beta_slab=slab)
                self.assertTrue(result["passed"])
                self.assertEqual(result["failures"], 0)
                self.assertLess(result["worst_slack"], -0.03)
        first = appendix_grid_check(0.001, beta_slab=(0.0, 0.002))
        self.assertEqual(first["cells"], 2 * 1500 * 2101)

    def test_empty_slab_is_rejected(self):
        with self.assertRaises(InfeasibleParameterError):
            appendix_grid_check(0.001, beta_slab=(2.0, 3.0))

    def test_side_checks_at_one_thousandth(self):
        self.assertTrue(large_delta_check(0.001)["passed"])
        self.assertTrue(hbar_below_h_check(0.001)["passed"])
        self.assertTrue(derivative_check(0.001)["passed"])


class TestCheckShortcuts(unittest.TestCase):
    """Test cases for the candidate-point checks against full scans."""

    def test_large_delta_matches_a_full_scan(self):
        step = 0.1
        worst = -math.inf
        for i in range(11):
            for j in range(15, 61):
                for k in range(22):
                    b, d, r = i * step, j * step, k * step
                    a = (3 - b + d) ** 2 * (2 - b + d + r) / ((2 - b + d) ** 2 * (2 + d))
                    worst = max(worst, 2 + a * hbar(1 / a, b, d) - 3 - 1.5 * r)
        self.assertAlmostEqual(large_delta_check(step)["worst_slack"], worst, places=9)

    def test_hbar_below_h_matches_a_full_scan(self):
        step = 0.05
        worst = -math.inf
        for i in range(21):
            for j in range(1, 31):
                b, d = i * step, j * step
                if d < b - 1e-12:
                    continue
                for k in range(21):
                    x = k * step
                    worst = max(worst, hbar(x, b, d) - h(x, b, d))
        self.assertAlmostEqual(hbar_below_h_check(step)["worst_gap"], worst, places=9)

    def test_derivatives_match_a_full_scan(self):
        step = 0.1
        h_slopes, hbar_slopes = [], []
        for i in range(21):
            for j in range(1, 61):
                b, d = i * step, j * step
                if d < b - 1e-12:
                    continue
                for k in range(11):
                    h_slopes.append(h_prime(k * step, b, d))
                    hbar_slopes.append(hbar_prime(k * step, b, d))
        result = derivative_check(step)
        self.assertAlmostEqual(result["h_prime"]["min"], min(h_slopes), places=9)
        self.assertAlmostEqual(result["h_prime"]["max"], max(h_slopes), places=9)
        self.assertAlmostEqual(result["hbar_prime"]["min"], min(hbar_slopes), places=9)
        self.assertAlmostEqual(result["hbar_prime"]["max"], max(hbar_slopes), places=9)


if __name__ == "__main__":
    unittest.main()

"""
Tests for the power method, the Markov process, the 2x2x2 closed form and the
bound curves.
"""
import unittest
import sys
import os

import numpy as np

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from markov_tensor.engine.types import SimplexVector, StatePair
from markov_tensor.engine.tensor_core import validate, f_p
from markov_tensor.engine.conditions import check_min_entry_condition
from markov_tensor.engine.generator import fixture, random_positive, random_simplex, RandomTensorSpec
from markov_tensor.engine.solvers import (
    Method, SolveOptions, power_method, markov_process, augmented_map,
    power_contraction_bound, markov_bound_curve, z_error_bound, x_error_bound,
    Quadratic222, solve_2x2x2, quadratic_trace, oracle_solution, iteration_statistics,
)
from markov_tensor.engine.errors import (
    HypothesisNotSatisfied, MaxIterationsExceeded, NoRootInUnitInterval, DimensionMismatch,
)


def uniform_tensor(n):
    return validate(np.full((n, n, n), 1.0 / n))


class TestPowerMethod(unittest.TestCase):

    def test_uniform_converges_in_one_step(self):
        x, trace = power_method(uniform_tensor(3), random_simplex(3, 9))
        self.assertTrue(trace.converged)
        self.assertEqual(trace.iterations_used, 1)
        np.testing.assert_allclose(x.x, np.full(3, 1.0 / 3.0), atol=1e-15)

    def test_iteration_counts(self):
        stats = iteration_statistics(fixture("dna_i"), Method.POWER, runs=10, seed=0)
        self.assertGreaterEqual(stats.mean_iterations, 7)
        self.assertLessEqual(stats.mean_iterations, 12)
        stats = iteration_statistics(fixture("dna_ii"), Method.POWER, runs=10, seed=0)
        self.assertGreaterEqual(stats.mean_iterations, 4)
        self.assertLessEqual(stats.mean_iterations, 8)

    def test_contraction_against_oracle(self):
        P = fixture("dna_i")
        ref = oracle_solution(P)
        for seed in range(5):
            x0 = random_simplex(3, seed)
            _, trace = power_method(P, x0, SolveOptions(tolerance=1e-10, reference_solution=ref))
            self.assertTrue(trace.bounds_available)
            errors = [x0.l1_distance(ref)] + trace.column("error")
            for prev, cur in zip(errors, errors[1:]):
                self.assertLessEqual(cur, 0.8 * prev + 1e-9)
            for step in trace.steps:
                self.assertAlmostEqual(step.bound, 0.8, places=12)
                if step.observed_ratio is not None and step.error > 1e-8:
                    self.assertLessEqual(step.observed_ratio, 0.8 + 1e-9)

    def test_ratio_column_starts_at_second_step(self):
        P = fixture("dna_i")
        ref = oracle_solution(P)
        x0 = random_simplex(3, 2)
        _, trace = power_method(P, x0, SolveOptions(reference_solution=ref))
        first, second = trace.steps[0], trace.steps[1]
        self.assertIsNone(first.observed_ratio)
        self.assertAlmostEqual(first.step_bound, 0.8 * x0.l1_distance(ref), places=12)
        self.assertAlmostEqual(second.observed_ratio, second.error / first.error, places=12)

    def test_iterates_stay_above_min_entry(self):
        P = fixture("dna_i")
        _, trace = power_method(P, SimplexVector.vertex(3, 1))
        for step in trace.steps:
            self.assertGreaterEqual(float(step.x.min()), 0.2 - 1e-12)

    def test_fixed_point_residual(self):
        tol = 1e-6
        P = fixture("dna_i")
        x, _ = power_method(P, random_simplex(3, 1), SolveOptions(tolerance=tol))
        self.assertLessEqual(f_p(P, x).l1_distance(x), 10 * tol)

    def test_bounds_unavailable_without_condition(self):
        x, trace = power_method(fixture("dna_ii"), random_simplex(3, 2),
                                SolveOptions(reference_solution=oracle_solution(fixture("dna_ii"))))
        self.assertTrue(trace.converged)
        self.assertFalse(trace.bounds_available)
        self.assertTrue(all(step.bound is None for step in trace.steps))
        self.assertTrue(all(step.error is not None for step in trace.steps))

    def test_max_iterations_exceeded(self):
        with self.assertRaises(MaxIterationsExceeded) as cm:
            power_method(fixture("dna_i"), SimplexVector.vertex(3, 0),
                         SolveOptions(tolerance=1e-15, max_iterations=2))
        exc = cm.exception
        self.assertFalse(exc.trace.converged)
        self.assertEqual(len(exc.trace.steps), 2)
        self.assertIsInstance(exc.x_last, SimplexVector)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            power_method(fixture("dna_i"), SimplexVector.uniform(2))

    def test_options_validated(self):
        with self.assertRaises(ValueError):
            SolveOptions(tolerance=0.0)
        with self.assertRaises(ValueError):
            SolveOptions(max_iterations=0)

    def test_random_starts_reach_one_fixed_point(self):
        # 20 small tensors, 50 random starts each
        opts = SolveOptions(tolerance=1e-10, record_trace=False)
        for seed in range(20):
            n = 2 + seed % 3
            P = random_positive(RandomTensorSpec(n, seed=seed))
            stats = iteration_statistics(P, Method.POWER, runs=50, seed=seed * 100, opts=opts)
            self.assertLessEqual(stats.spread, 1e-6)


class TestMarkovProcess(unittest.TestCase):

    def test_uniform_converges_in_one_step(self):
        P = uniform_tensor(3)
        x, trace = markov_process(P, SimplexVector.vertex(3, 0), SimplexVector.vertex(3, 1))
        self.assertEqual(trace.iterations_used, 1)
        np.testing.assert_allclose(x.x, np.full(3, 1.0 / 3.0), atol=1e-15)

    def test_iteration_counts(self):
        stats = iteration_statistics(fixture("dna_i"), Method.MARKOV, runs=10, seed=0)
        self.assertGreaterEqual(stats.mean_iterations, 9)
        self.assertLessEqual(stats.mean_iterations, 15)
        stats = iteration_statistics(fixture("dna_ii"), Method.MARKOV, runs=10, seed=0)
        self.assertGreaterEqual(stats.mean_iterations, 8)
        self.assertLessEqual(stats.mean_iterations, 14)

    def test_two_term_recursion_and_closed_bound(self):
        P = fixture("dna_i")
        ref = oracle_solution(P)
        for seed in range(5):
            x0 = random_simplex(3, seed)
            _, trace = markov_process(P, x0, f_p(P, x0),
                                      SolveOptions(tolerance=1e-10, reference_solution=ref))
            self.assertIn(trace.anchor, (1, 2))
            for step in trace.steps:
                self.assertLessEqual(step.error, step.step_bound + 1e-9)
                self.assertIsNotNone(step.bound)
                self.assertLessEqual(step.error, step.bound + 1e-9)
                # never looser than the bound anchored at x(1), x(2)
                self.assertLessEqual(step.bound, 0.8 ** -(-(step.k + 1) // 2) + 1e-12)
                self.assertLessEqual(step.z_error, step.z_bound + 1e-9)

    def test_random_tensors_dominated_by_curve(self):
        for seed in range(3):
            spec = RandomTensorSpec(20, seed=seed)
            P = random_positive(spec)
            r = 2.0 * (1.0 - spec.n * spec.delta)
            x0 = random_simplex(20, seed)
            _, trace = markov_process(P, x0, f_p(P, x0),
                                      SolveOptions(reference_solution=oracle_solution(P)))
            for step in trace.steps:
                self.assertLessEqual(step.error, r ** -(-(step.k + 1) // 2) * (1 + 1e-9))

    def test_random_starts_without_condition(self):
        P = fixture("dna_ii")
        x0 = random_simplex(3, 4)
        x, trace = markov_process(P, x0, random_simplex(3, 5))
        self.assertTrue(trace.converged)
        self.assertFalse(trace.bounds_available)
        self.assertIsNone(trace.anchor)

    def test_max_iterations_exceeded(self):
        P = fixture("dna_i")
        with self.assertRaises(MaxIterationsExceeded) as cm:
            markov_process(P, SimplexVector.vertex(3, 0), SimplexVector.vertex(3, 2),
                           SolveOptions(max_iterations=1))
        self.assertEqual(len(cm.exception.trace.steps), 1)


class TestAugmentedMap(unittest.TestCase):

    def test_uniform(self):
        z = StatePair(SimplexVector.vertex(3, 0), SimplexVector.vertex(3, 1))
        g = augmented_map(uniform_tensor(3), z)
        np.testing.assert_allclose(g.x.x, np.full(3, 1.0 / 3.0), atol=1e-15)
        np.testing.assert_array_equal(g.y.x, [1.0, 0.0, 0.0])

    def test_fixture_at_barycenter(self):
        u = SimplexVector.uniform(3)
        g = augmented_map(fixture("dna_i"), StatePair(u, u))
        np.testing.assert_allclose(g.x.x, [0.46, 0.246667, 0.293333], atol=1e-6)
        np.testing.assert_array_equal(g.y.x, u.x)

    def test_fixed_point(self):
        P = fixture("dna_i")
        x = oracle_solution(P)
        z = StatePair(x, x)
        self.assertLess(augmented_map(P, z).l1_distance(z), 1e-12)


class TestBounds(unittest.TestCase):

    def test_power_contraction_bound(self):
        self.assertAlmostEqual(power_contraction_bound(fixture("dna_i")), 0.8, places=12)
        self.assertEqual(power_contraction_bound(uniform_tensor(3)), 0.0)
        with self.assertRaises(HypothesisNotSatisfied):
            power_contraction_bound(fixture("dna_ii"))

    def test_curve_values(self):
        self.assertAlmostEqual(z_error_bound(0.7, 1), 1.19)
        curve = markov_bound_curve(fixture("dna_i"), 5)
        self.assertAlmostEqual(curve.r, 0.8, places=12)
        self.assertEqual(len(curve.z), 5)
        self.assertAlmostEqual(curve.x[2], 0.512, places=12)
        self.assertAlmostEqual(curve.z[0], 0.8 ** 2 + 0.8, places=12)

    def test_curve_uniform_is_zero(self):
        curve = markov_bound_curve(uniform_tensor(3), 4)
        self.assertEqual(curve.z, [0.0] * 4)
        self.assertEqual(curve.x, [0.0] * 4)

    def test_curve_errors(self):
        with self.assertRaises(HypothesisNotSatisfied):
            markov_bound_curve(fixture("dna_ii"), 3)
        with self.assertRaises(ValueError):
            markov_bound_curve(fixture("dna_i"), 0)

    def test_x_bound_exponent(self):
        self.assertEqual(x_error_bound(0.5, 0), 0.5)
        self.assertEqual(x_error_bound(0.5, 1), 0.25)
        self.assertEqual(x_error_bound(0.5, 2), 0.25)
        self.assertEqual(x_error_bound(0.5, 3), 0.125)


class TestQuadratic(unittest.TestCase):

    def test_uniform(self):
        x, diag = solve_2x2x2(Quadratic222(0.5, 0.5, 0.5, 0.5))
        np.testing.assert_allclose(x.x, [0.5, 0.5], atol=1e-15)
        self.assertEqual(diag.case, "linear")
        self.assertTrue(diag.unique)

    def test_quadratic_root(self):
        q = Quadratic222(0.7, 0.5, 0.5, 0.4)
        x, diag = solve_2x2x2(q)
        self.assertAlmostEqual(x.x[0], 4.0 - np.sqrt(12.0), places=12)
        self.assertEqual(diag.case, "quadratic")
        self.assertAlmostEqual(diag.discriminant, 0.48, places=12)
        self.assertLess(diag.fixed_point_residual, 1e-12)
        xp, _ = power_method(q.to_tensor(), SimplexVector.uniform(2), SolveOptions(tolerance=1e-12))
        self.assertLess(x.l1_distance(xp), 1e-8)

    def test_reducible_corner(self):
        with self.assertRaises(NoRootInUnitInterval) as cm:
            solve_2x2x2(Quadratic222(1.0, 0.0, 0.0, 0.0))
        got = sorted(float(c.x[0]) for c in cm.exception.candidates)
        self.assertEqual(got, [0.0, 1.0])
        self.assertFalse(cm.exception.diagnostics.irreducible)

    def test_line_of_fixed_points(self):
        x, diag = solve_2x2x2(Quadratic222(1.0, 0.3, 0.7, 0.0))
        np.testing.assert_allclose(x.x, [0.5, 0.5])
        self.assertFalse(diag.unique)
        self.assertEqual(diag.note, "non-unique line of fixed points")
        trace = quadratic_trace(x, diag)
        self.assertEqual(trace.method, Method.QUADRATIC)

    def test_tensor_round_trip(self):
        q = Quadratic222(0.7, 0.5, 0.5, 0.4)
        self.assertEqual(Quadratic222.from_tensor(q.to_tensor()), q)
        with self.assertRaises(DimensionMismatch):
            Quadratic222.from_tensor(fixture("dna_i"))
        with self.assertRaises(ValueError):
            Quadratic222(1.2, 0.5, 0.5, 0.5)


class TestMethodAgreement(unittest.TestCase):

    def test_fixture(self):
        P = fixture("dna_i")
        opts = SolveOptions(tolerance=1e-10, record_trace=False)
        x0 = random_simplex(3, 0)
        xp, _ = power_method(P, x0, opts)
        xm, _ = markov_process(P, x0, f_p(P, x0), opts)
        self.assertLess(xp.l1_distance(xm), 1e-6)

    def test_random_tensors(self):
        opts = SolveOptions(tolerance=1e-10, record_trace=False)
        for seed in range(20):
            n = 2 + seed % 5
            P = random_positive(RandomTensorSpec(n, seed=seed))
            self.assertTrue(check_min_entry_condition(P).holds)
            x0 = random_simplex(n, seed)
            xp, _ = power_method(P, x0, opts)
            xm, _ = markov_process(P, x0, f_p(P, x0), opts)
            self.assertLess(xp.l1_distance(xm), 1e-6)
            if n == 2:
                xq, diag = solve_2x2x2(Quadratic222.from_tensor(P))
                self.assertLess(xq.l1_distance(xp), 1e-8)
                self.assertLess(diag.fixed_point_residual, 1e-12)

    def test_statistics_are_deterministic(self):
        P = fixture("dna_ii")
        a = iteration_statistics(P, Method.MARKOV, runs=4, seed=3)
        b = iteration_statistics(P, Method.MARKOV, runs=4, seed=3)
        self.assertEqual(a.iterations, b.iterations)
        self.assertEqual(len(a.traces), 4)


if __name__ == "__main__":
    unittest.main()

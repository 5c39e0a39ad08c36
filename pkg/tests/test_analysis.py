"""
Tests for the condition report.
"""
import json
import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from markov_tensor.engine.tensor_core import validate
from markov_tensor.engine.generator import fixture, random_positive, RandomTensorSpec
from markov_tensor.analysis import (
    sample_simplex_points, diagnose, format_verdict, format_condition_report, report_to_dict,
    UNKNOWN_CAPPED,
)


class TestSampling(unittest.TestCase):

    def test_points(self):
        points = sample_simplex_points(4, count=10, seed=1)
        self.assertEqual(len(points), 1 + 4 + 10)
        np.testing.assert_allclose(points[0].x, np.full(4, 0.25))
        for p in points:
            self.assertGreater(float(p.x.min()), 0.0)
        # pulled vertex
        self.assertGreater(points[1].x[0], 1.0 - 1e-5)

    def test_deterministic(self):
        a = sample_simplex_points(3, 5, seed=2)
        b = sample_simplex_points(3, 5, seed=2)
        for p, q in zip(a, b):
            np.testing.assert_array_equal(p.x, q.x)


class TestDiagnose(unittest.TestCase):

    def test_fixture_holds(self):
        report = diagnose(fixture("dna_i"), samples=100)
        self.assertEqual(format_verdict(report),
                         "min-entry condition: HOLDS (delta=0.2 > 0.1667), contraction=0.8")
        self.assertTrue(report.is_positive)
        self.assertIs(report.is_irreducible, True)
        self.assertTrue(report.eigen_one_excluded_everywhere)
        self.assertEqual(len(report.eigen_one_excluded_at_samples), 104)
        self.assertGreater(report.min_jacobian_margin, 0.0)

    def test_fixture_fails(self):
        report = diagnose(fixture("dna_ii"), samples=10)
        self.assertEqual(format_verdict(report),
                         "min-entry condition: FAILS (delta=0.1516 <= 0.1667)")
        self.assertIsNone(report.contraction)
        self.assertTrue(report.is_positive)

    def test_uniform(self):
        report = diagnose(validate(np.full((3, 3, 3), 1.0 / 3.0)), samples=5)
        self.assertEqual(format_verdict(report),
                         "min-entry condition: HOLDS (delta=0.3333 > 0.1667), contraction=0")

    def test_condition_implies_eigen_exclusion(self):
        for seed in range(5):
            P = random_positive(RandomTensorSpec(2 + seed, seed=seed))
            report = diagnose(P, samples=100, seed=seed)
            self.assertTrue(report.min_entry_condition_holds)
            self.assertTrue(report.is_positive)
            self.assertTrue(report.eigen_one_excluded_everywhere)

    def test_irreducibility_capped(self):
        n = 21
        p = np.full((n, n, n), 1.0 / n)
        p[0, 0, 0] = 0.0
        p[1, 0, 0] = 2.0 / n
        report = diagnose(validate(p), samples=2)
        self.assertEqual(report.is_irreducible, UNKNOWN_CAPPED)
        self.assertFalse(report.is_positive)
        self.assertIn(UNKNOWN_CAPPED, format_condition_report(report))

    def test_text_and_dict(self):
        report = diagnose(fixture("dna_i"), samples=3, seed=4)
        text = format_condition_report(report, verbose=True)
        self.assertIn("CONDITION REPORT", text)
        self.assertIn("eigenvalue 1 excluded: 7/7", text)
        data = json.loads(json.dumps(report_to_dict(report)))
        self.assertEqual(data["seed"], 4)
        self.assertTrue(data["min_entry_condition_holds"])
        self.assertEqual(len(data["eigen_one_excluded_at_samples"]), 7)


if __name__ == "__main__":
    unittest.main()

"""
Tests for configuration models and the exception hierarchy.
"""

import unittest

from pydantic import ValidationError

from tensor_ccs.exceptions import (
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_PARAMETER,
    CapExceededError,
    ConvergenceFailure,
    DomainError,
    ParameterError,
    ParseError,
    TensorIOError,
    exit_code_for,
)
from tensor_ccs.models import BoundInputs, ExperimentConfig, MultiRank, SolverConfig, SolverReport


class TestSolverConfig(unittest.TestCase):
    """Test cases for SolverConfig."""

    def test_defaults(self):
        """Test the default tolerance, iteration cap and step rule."""
        cfg = SolverConfig(r=2)
        self.assertEqual(cfg.tol, 1e-10)
        self.assertEqual(cfg.max_iter, 500)
        self.assertEqual(cfg.step_sizes(0.3, 0.6), (1.0, 1.0, 1.0))

    def test_unbiased_steps(self):
        """Test the inverse-probability step sizes and explicit overrides."""
        cfg = SolverConfig(r=2, step_rule="unbiased")
        self.assertEqual(cfg.step_sizes(0.5, 0.25), (2.0, 4.0, 2.0))
        self.assertEqual(cfg.step_sizes(0.0, 0.0), (1.0, 1.0, 1.0))

        explicit = SolverConfig(r=2, step_rule="unbiased", eta_U=0.5)
        self.assertEqual(explicit.step_sizes(0.5, 0.5)[2], 0.5)

    def test_validation(self):
        """Test rejection of non-positive ranks, tolerances and step sizes."""
        for fields in ({"r": 0}, {"r": 1, "tol": 0.0}, {"r": 1, "eta_R": -1.0}, {"r": 1, "step": 1}):
            with self.subTest(fields=fields):
                with self.assertRaises(ValidationError):
                    SolverConfig(**fields)


class TestReports(unittest.TestCase):
    """Test cases for report models."""

    def test_solver_report_history(self):
        """Test that histories must match the iteration count."""
        SolverReport(iterations=2, e_history=[0.5, 1e-12], converged=True, tol=1e-10)
        with self.assertRaises(ValidationError):
            SolverReport(iterations=2, e_history=[0.5], converged=False, tol=1e-10)
        with self.assertRaises(ValidationError):
            SolverReport(iterations=0, converged=True, tol=1e-10)
        with self.assertRaises(ValidationError):
            SolverReport(iterations=1, e_history=[0.5], converged=True, tol=1e-10)

    def test_multirank_consistency(self):
        """Test that tubal and total ranks must agree with the per-slice ranks."""
        MultiRank(per_slice=(2, 1, 2), tubal=2, sum=5, tolerance=1e-9)
        with self.assertRaises(ValidationError):
            MultiRank(per_slice=(2, 1), tubal=1, sum=3, tolerance=1e-9)
        with self.assertRaises(ValidationError):
            MultiRank(per_slice=(2, 1), tubal=2, sum=4, tolerance=1e-9)


class TestExperimentModels(unittest.TestCase):
    """Test cases for ExperimentConfig and BoundInputs."""

    def test_experiment_defaults(self):
        """Test the default grid."""
        cfg = ExperimentConfig()
        self.assertEqual(cfg.dims, (60, 60, 16))
        self.assertEqual(cfg.ranks, [2, 5, 7])
        self.assertEqual(len(cfg.probabilities), 9)
        self.assertEqual(cfg.trials, 25)

    def test_experiment_grid_checks(self):
        """Test rejection of out-of-range grid values."""
        for fields in ({"deltas": [1.5]}, {"probabilities": [0.0]}, {"alphas": [2.0]}, {"ranks": [0]}):
            with self.subTest(fields=fields):
                with self.assertRaises(ValidationError):
                    ExperimentConfig(**fields)

    def test_bound_inputs(self):
        """Test the rank-statistic ordering and the beta floor."""
        base = dict(n1=10, n2=10, n3=2, r=1, mu0=1.0, beta=1.0, rvec_inf=1, rvec_1=2)
        self.assertEqual(BoundInputs(**base).kappa, 1.0)
        with self.assertRaises(ValidationError):
            BoundInputs(**{**base, "rvec_inf": 3})
        with self.assertRaises(ValidationError):
            BoundInputs(**{**base, "beta": 0.9})


class TestExceptions(unittest.TestCase):
    """Test cases for exception formatting and exit codes."""

    def test_hint_formatting(self):
        """Test that hints are appended to the message."""
        self.assertEqual(str(ParameterError("bad rank", hint="lower it")), "bad rank (hint: lower it)")
        self.assertEqual(str(ParameterError("bad rank")), "bad rank")
        self.assertEqual(str(ParseError("bad magic", offset=0)), "bad magic at byte 0")
        self.assertIn("frontal slice 3", str(DomainError("singular", slice_index=3)))

    def test_exit_codes(self):
        """Test the exit code of each error family."""
        with self.assertRaises(ValidationError) as ctx:
            SolverConfig(r=0)
        cases = [
            (CapExceededError("too big", requested=10, cap=5), EXIT_PARAMETER),
            (ctx.exception, EXIT_PARAMETER),
            (ParseError("bad", offset=3), EXIT_IO),
            (TensorIOError("unreadable"), EXIT_IO),
            (FileNotFoundError("absent"), EXIT_IO),
            (ConvergenceFailure("stopped", iterations=5, last_error=0.1), EXIT_NUMERICAL),
        ]
        for error, expected in cases:
            with self.subTest(error=type(error).__name__):
                self.assertEqual(exit_code_for(error), expected)


if __name__ == '__main__':
    unittest.main()

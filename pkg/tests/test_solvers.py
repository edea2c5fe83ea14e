"""
Tests for the ITCURTC, TSTC and IHT solvers.
"""

import io
import unittest

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from tensor_ccs.exceptions import (
    CapExceededError,
    DivergenceError,
    DomainError,
    ParameterError,
    PlanValidationError,
    SubsolverError,
)
from tensor_ccs.experiments import gen_lowrank
from tensor_ccs.metrics import rel_error
from tensor_ccs.models import SolverConfig
from tensor_ccs.sampling import ObservationSet, bernoulli_mask, capture, make_ccs_plan, make_rng
from tensor_ccs.solvers import (
    ItcurtcState,
    ObservedBlocks,
    WorkCounter,
    iht_complete,
    itcurtc,
    itcurtc_step,
    stopping_e,
    tstc,
    tstc_residual,
)
from tensor_ccs.spectral import truncate_rank
from tensor_ccs.tcur import cur_reconstruct
from tensor_ccs.tensor import DenseTensor3


class TestItcurtc(unittest.TestCase):
    """Test cases for ITCURTC."""

    def setUp(self):
        """Set up test fixtures."""
        self.truth = gen_lowrank(30, 30, 8, 2, seed=7)
        self.plan = capture(self.truth, make_ccs_plan(self.truth.dims, 15, 15, 0.7, 0.7, seed=11))

    def test_fully_observed(self):
        """Test that a fully observed plan is solved within five iterations."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 30, 30, 1.0, 1.0, seed=0))
        factors, report = itcurtc(plan, SolverConfig(r=2, max_iter=5), truth=self.truth)

        self.assertTrue(report.converged)
        self.assertLessEqual(report.iterations, 5)
        self.assertLessEqual(report.eps_history[-1], 1e-6)
        self.assertLessEqual(rel_error(self.truth, factors), 1e-6)

    def test_recovers_well_sampled(self):
        """Test recovery from half the slices at p = 0.7."""
        factors, report = itcurtc(self.plan, SolverConfig(r=2, tol=1e-14, max_iter=500))

        self.assertLessEqual(rel_error(self.truth, factors), 1e-3)
        self.assertEqual(len(report.e_history), report.iterations)
        self.assertEqual(len(report.work_history), report.iterations)
        self.assertIsNone(report.eps_history)

    def test_zero_observations(self):
        """Test the immediate report for a plan without observations."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 5, 5, 0.0, 0.0, seed=1))
        factors, report = itcurtc(plan, SolverConfig(r=2))

        self.assertEqual(report.iterations, 0)
        self.assertFalse(report.converged)
        self.assertEqual(float(np.abs(factors.C.values).max()), 0.0)

    def test_rank_larger_than_slices(self):
        """Test the remediation hint when r exceeds min(|I|, |J|)."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 2, 5, 0.5, 0.5, seed=1))
        with self.assertRaises(ParameterError) as ctx:
            itcurtc(plan, SolverConfig(r=3))
        self.assertIn("select more slices", str(ctx.exception))

    def test_requires_values(self):
        """Test that a plan without captured values is rejected."""
        plan = make_ccs_plan(self.truth.dims, 5, 5, 0.5, 0.5, seed=1)
        with self.assertRaises(PlanValidationError):
            itcurtc(plan, SolverConfig(r=2))

    def test_divergence(self):
        """Test that over-relaxed steps are reported with their step sizes."""
        cfg = SolverConfig(r=2, eta_R=50.0, eta_C=50.0, eta_U=50.0, max_iter=100)
        with self.assertRaises(DivergenceError) as ctx:
            itcurtc(self.plan, cfg)
        self.assertEqual(ctx.exception.step_sizes, (50.0, 50.0, 50.0))

    def test_trace(self):
        """Test one CSV trace line per iteration after the header."""
        sink = io.StringIO()
        cfg = SolverConfig(r=2, max_iter=4, trace=True)
        _, report = itcurtc(self.plan, cfg, truth=self.truth, trace_sink=sink)

        lines = sink.getvalue().splitlines()
        self.assertEqual(lines[0], "k,e_k,eps_k")
        self.assertEqual(len(lines), report.iterations + 1)
        self.assertEqual(lines[1].split(",")[0], "1")

    def test_step_from_zero(self):
        """Test the stopping rule at T_0 = 0 and after one step."""
        blocks = ObservedBlocks(self.plan)
        state = ItcurtcState.zeros(self.plan, 2)
        self.assertAlmostEqual(stopping_e(self.plan, state, blocks), 1.0, places=12)
        self.assertEqual(blocks.size, len(self.plan.union()))

        state = itcurtc_step(state, self.plan, SolverConfig(r=2), blocks)
        self.assertEqual(state.k, 1)
        self.assertLess(stopping_e(self.plan, state, blocks), 1.0)

    def test_zero_values_undefined(self):
        """Test that an all-zero observation set has no stopping rule."""
        zero = capture(self.truth * 0.0, make_ccs_plan(self.truth.dims, 5, 5, 0.5, 0.5, seed=1))
        with self.assertRaises(DomainError):
            itcurtc(zero, SolverConfig(r=2))

    def test_truth_restriction_is_fixed(self):
        """Test that a step started at the true slabs leaves them in place."""
        rows, cols = self.plan.I.as_array(), self.plan.J.as_array()
        t = self.truth.values
        n3, r = self.truth.n3, 2
        state = ItcurtcState(
            C=t[:, cols, :].copy(),
            U=t[rows][:, cols, :].copy(),
            R=t[rows].copy(),
            w_hat=np.zeros((n3, rows.size, r), dtype=np.complex128),
            vh_hat=np.zeros((n3, r, cols.size), dtype=np.complex128),
            T_R=t[rows].copy(),
            T_C=t[:, cols, :].copy(),
        )
        moved = itcurtc_step(state, self.plan, SolverConfig(r=r))

        self.assertLessEqual(np.linalg.norm(moved.T_R - t[rows]) / np.linalg.norm(t[rows]), 1e-10)
        self.assertLessEqual(np.linalg.norm(moved.T_C - t[:, cols, :]) / np.linalg.norm(t[:, cols, :]), 1e-10)
        self.assertLessEqual(stopping_e(self.plan, moved), 1e-20)

    def test_first_step_truncates_observed_block(self):
        """Test that U_1 from the zero state is H_r of the observed I x J block."""
        rows, cols = self.plan.I.as_array(), self.plan.J.as_array()
        local_row = {int(i): a for a, i in enumerate(rows)}
        local_col = {int(j): b for b, j in enumerate(cols)}
        block = np.zeros((rows.size, cols.size, self.truth.n3))
        union = self.plan.union()
        for (i, j, k), value in zip(union.coords, union.values):
            if int(i) in local_row and int(j) in local_col:
                block[local_row[int(i)], local_col[int(j)], k] = value

        state = itcurtc_step(ItcurtcState.zeros(self.plan, 2), self.plan, SolverConfig(r=2))
        expected = truncate_rank(DenseTensor3(block), 2)
        assert_allclose(state.U, expected.values, rtol=0, atol=1e-10)
        assert_array_equal(state.R[:, cols, :], state.U)
        assert_array_equal(state.C[rows, :, :], state.U)

    def test_stopping_rule_half_matched(self):
        """Test e_k = 0.5 when half of four unit observations are matched."""
        ones = DenseTensor3(np.ones((2, 2, 1)))
        plan = capture(ones, make_ccs_plan(ones.dims, 2, 2, 1.0, 1.0, seed=0))
        state = ItcurtcState.zeros(plan, 1)
        half = np.zeros((2, 2, 1))
        half[list(plan.I.indices).index(0), :, :] = 1.0
        state = state.model_copy(update={"T_R": half})

        self.assertEqual(len(plan.union()), 4)
        self.assertAlmostEqual(stopping_e(plan, state), 0.5, places=15)


class TestItcurtcCost(unittest.TestCase):
    """Test cases for the per-iteration cost and memory of ITCURTC."""

    def _one_step(self, n2):
        truth = gen_lowrank(60, n2, 4, 2, seed=n2)
        plan = capture(truth, make_ccs_plan(truth.dims, 6, 6, 0.5, 0.5, seed=3))
        blocks = ObservedBlocks(plan)
        work = WorkCounter()
        work.start()
        state = itcurtc_step(ItcurtcState.zeros(plan, 2), plan, SolverConfig(r=2), blocks, work)
        return plan, blocks, state, work.finish()

    def test_work_linear_in_n2(self):
        """Test that multiply-adds grow linearly in n2 at fixed |I|, |J|, r and n3."""
        works = {n2: self._one_step(n2)[3] for n2 in (60, 120, 240)}
        first = works[120] - works[60]
        second = works[240] - works[120]
        self.assertGreater(first, 0)
        self.assertAlmostEqual(second / (2 * first), 1.0, delta=0.1)

    def test_memory_ceiling(self):
        """Test that the state stays within the slab-sized memory ceiling."""
        plan, blocks, state, _ = self._one_step(60)
        n1, n2, n3 = plan.dims
        slabs = len(plan.I) * n2 * n3 + len(plan.J) * n1 * n3
        self.assertLessEqual(state.live_entries(), 4 * (slabs + blocks.size))
        self.assertLess(state.live_entries(), n1 * n2 * n3)


class TestIht(unittest.TestCase):
    """Test cases for the IHT slab sub-solver."""

    def test_fully_observed(self):
        """Test exact recovery from all entries."""
        truth = gen_lowrank(6, 5, 3, 1, seed=2)
        omega = bernoulli_mask(truth.dims, 1.0, make_rng(0))
        omega = omega.with_values(truth.values[omega.i, omega.j, omega.k])
        completed = iht_complete(omega, 1)
        assert_allclose(completed.values, truth.values, atol=1e-8)

    def test_errors(self):
        """Test the parameter and domain checks."""
        shape = (4, 4, 2)
        empty = ObservationSet.empty(shape, with_values=True)
        zeros = ObservationSet.from_coords(shape, [[0, 0, 0]], values=[0.0])
        ones = ObservationSet.from_coords(shape, [[0, 0, 0]], values=[1.0])
        with self.assertRaises(DomainError):
            iht_complete(empty, 1)
        with self.assertRaises(DomainError):
            iht_complete(zeros, 1)
        with self.assertRaises(ParameterError):
            iht_complete(ones, 5)
        with self.assertRaises(ParameterError):
            iht_complete(ObservationSet.from_coords(shape, [[0, 0, 0]]), 1)

    def test_recovers_rank_one_slab(self):
        """Test recovery of a rank-1 10 x 10 x 4 tensor from 70% of its entries."""
        truth = gen_lowrank(10, 10, 4, 1, seed=6)
        omega = bernoulli_mask(truth.dims, 0.7, make_rng(8))
        omega = omega.with_values(truth.values[omega.i, omega.j, omega.k])
        completed = iht_complete(omega, 1, max_iter=300)
        self.assertLessEqual(rel_error(truth, completed), 1e-4)


class TestTstc(unittest.TestCase):
    """Test cases for TSTC."""

    def setUp(self):
        """Set up test fixtures."""
        self.truth = gen_lowrank(12, 10, 4, 2, seed=4)

    def test_fully_observed(self):
        """Test that TSTC returns the tensor when both slabs are fully observed."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 12, 10, 1.0, 1.0, seed=0))
        estimate = tstc(plan, 2)
        self.assertLess(rel_error(self.truth, estimate), 1e-8)

    def test_custom_subsolver_errors(self):
        """Test that sub-solver failures name the slab."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 4, 4, 0.5, 0.5, seed=0))

        def failing(omega, r):
            raise DomainError("no luck")

        with self.assertRaises(SubsolverError) as ctx:
            tstc(plan, 2, subsolver=failing)
        self.assertEqual(ctx.exception.slab, "R")

        def wrong_shape(omega, r):
            return gen_lowrank(2, 2, 4, 1, seed=0)

        with self.assertRaises(SubsolverError):
            tstc(plan, 2, subsolver=wrong_shape)

    def test_caps_and_values(self):
        """Test the dense cap and the captured-values requirement."""
        plan = make_ccs_plan(self.truth.dims, 4, 4, 0.5, 0.5, seed=0)
        with self.assertRaises(ParameterError):
            tstc(plan, 2)
        with self.assertRaises(CapExceededError):
            tstc(capture(self.truth, plan), 2, max_entries=10)

    def test_empty_row_slab(self):
        """Test that an unobserved R slab is reported as a slab R failure."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 4, 4, 0.0, 0.8, seed=2))
        self.assertEqual(len(plan.omega_R), 0)
        with self.assertRaises(SubsolverError) as ctx:
            tstc(plan, 2)
        self.assertEqual(ctx.exception.slab, "R")
        self.assertIn("slab R", str(ctx.exception))

    def test_residual(self):
        """Test the masked residual of dense estimates."""
        plan = capture(self.truth, make_ccs_plan(self.truth.dims, 4, 4, 0.5, 0.5, seed=0))
        self.assertEqual(tstc_residual(plan, self.truth), 0.0)
        self.assertAlmostEqual(tstc_residual(plan, self.truth * 0.0), 1.0, places=12)
        self.assertAlmostEqual(tstc_residual(plan, self.truth * 0.5), 0.25, places=12)
        with self.assertRaises(ParameterError):
            tstc_residual(plan, gen_lowrank(4, 4, 4, 1, seed=0))


@pytest.mark.slow
def test_itcurtc_convergence_is_monotone_late():
    """Test that e_k stops increasing after five iterations on well-sampled plans."""
    monotone = 0
    for seed in range(10):
        truth = gen_lowrank(30, 30, 8, 2, seed=100 + seed)
        plan = capture(truth, make_ccs_plan(truth.dims, 15, 15, 0.7, 0.7, seed=seed))
        _, report = itcurtc(plan, SolverConfig(r=2, max_iter=300, eps_tol=1e-6), truth=truth)
        late = np.array(report.e_history[5:])
        if np.all(np.diff(late) <= 1e-20 + 1e-9 * late[:-1]):
            monotone += 1
        assert report.eps_history[-1] <= 1e-6
    assert monotone >= 9


@pytest.mark.slow
def test_tstc_recovers_desk_scale():
    """Test TSTC with the IHT sub-solver on 60 x 60 x 16 tensors over 10 seeds."""
    for seed in range(10):
        truth = gen_lowrank(60, 60, 16, 2, seed=200 + seed)
        plan = capture(truth, make_ccs_plan(truth.dims, 18, 18, 0.6, 0.6, seed=seed))
        assert rel_error(truth, tstc(plan, 2)) <= 1e-3


def test_solvers_agree_on_full_plan(lowrank_tensor, full_plan, assert_tensor_close):
    """Test that ITCURTC and TSTC both return the tensor from a fully observed plan."""
    factors, _ = itcurtc(full_plan, SolverConfig(r=2, max_iter=5))
    assert_tensor_close(cur_reconstruct(factors), lowrank_tensor, atol=1e-8)
    assert_tensor_close(tstc(full_plan, 2), lowrank_tensor, atol=1e-8)


if __name__ == '__main__':
    unittest.main()

"""
Test configuration and fixtures for tensor-ccs tests.
"""

import numpy as np
import pytest

from tensor_ccs.experiments import gen_lowrank
from tensor_ccs.sampling import capture, make_ccs_plan


@pytest.fixture
def lowrank_tensor():
    """Tubal-rank 2 tensor, 30 x 30 x 8."""
    return gen_lowrank(30, 30, 8, 2, seed=7)


@pytest.fixture
def captured_plan(lowrank_tensor):
    """t-CCS plan on ``lowrank_tensor`` with half the slices and p = 0.7, values captured."""
    plan = make_ccs_plan(lowrank_tensor.dims, 15, 15, 0.7, 0.7, seed=11)
    return capture(lowrank_tensor, plan)


@pytest.fixture
def full_plan(lowrank_tensor):
    """Plan observing every entry of ``lowrank_tensor``."""
    n1, n2, _ = lowrank_tensor.dims
    return capture(lowrank_tensor, make_ccs_plan(lowrank_tensor.dims, n1, n2, 1.0, 1.0, seed=0))


@pytest.fixture
def assert_tensor_close():
    """Compare two tensors entrywise."""

    def check(actual, expected, atol=1e-10):
        assert actual.dims == expected.dims
        np.testing.assert_allclose(actual.values, expected.values, rtol=0, atol=atol)

    return check

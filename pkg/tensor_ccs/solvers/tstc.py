# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Two-step tensor completion (TSTC): complete each slab, then join them with t-CUR."""

import logging
from typing import Optional, Protocol

import numpy as np

from tensor_ccs.exceptions import (
    CapExceededError,
    DomainError,
    ParameterError,
    SubsolverError,
    TensorCcsError,
)
from tensor_ccs.sampling import CcsPlan, ObservationSet, Slab, slab_observations
from tensor_ccs.solvers.iht import iht_complete
from tensor_ccs.spectral import tpinv
from tensor_ccs.tensor import DenseTensor3, IndexSet, subtensor, tprod

logger = logging.getLogger(__name__)

TSTC_MAX_ENTRIES = 10**8


class Subsolver(Protocol):
    """Completes one slab from its observations at a target tubal rank."""

    def __call__(self, omega: ObservationSet, r: int) -> DenseTensor3: ...


def _complete_slab(plan: CcsPlan, slab: Slab, r: int, subsolver: Subsolver) -> DenseTensor3:
    omega = slab_observations(plan, slab)
    try:
        completed = subsolver(omega, r)
    except TensorCcsError as e:
        raise SubsolverError(str(e), slab=slab) from e
    if completed.dims != omega.shape:
        raise SubsolverError(
            f"returned a {completed.dims} tensor for a {omega.shape} slab", slab=slab
        )
    return completed


def tstc(
    plan: CcsPlan,
    r: int,
    subsolver: Optional[Subsolver] = None,
    max_entries: int = TSTC_MAX_ENTRIES,
) -> DenseTensor3:
    """Complete R from Omega_R and C from Omega_C, then return C * U^+ * R with U = [C]_{I,:,:}.

    Args:
        plan: Captured t-CCS plan
        r: Target tubal rank passed to the sub-solver
        subsolver: Slab completion routine; defaults to :func:`iht_complete`
        max_entries: Largest dense output allowed

    Returns:
        The dense n1 x n2 x n3 estimate

    Raises:
        SubsolverError: If completing a slab fails (``slab`` names R or C)
        CapExceededError: If the dense output would exceed ``max_entries``
    """
    if not plan.has_values:
        raise ParameterError("plan carries no observed values", hint="call sampling.capture() first")
    if plan.size > max_entries:
        raise CapExceededError(
            f"TSTC output of {plan.dims} exceeds the dense cap",
            requested=plan.size, cap=max_entries,
        )
    subsolver = subsolver or iht_complete
    logger.info("TSTC on %s: |I|=%d |J|=%d r=%d", plan.dims, len(plan.I), len(plan.J), r)
    R_tilde = _complete_slab(plan, "R", r, subsolver)
    C_tilde = _complete_slab(plan, "C", r, subsolver)
    U_tilde = subtensor(C_tilde, rows=IndexSet.of(plan.I.indices, C_tilde.n1, replacement=True))
    return tprod(C_tilde, tprod(tpinv(U_tilde), R_tilde))


def tstc_residual(plan: CcsPlan, estimate: DenseTensor3) -> float:
    """Masked residual ratio of a dense estimate on Omega_R union Omega_C, the e_k of ITCURTC.

    Raises:
        ParameterError: If the plan has no values or the estimate has the wrong shape
        DomainError: If every observed value is zero
    """
    if not plan.has_values:
        raise ParameterError("plan carries no observed values", hint="call sampling.capture() first")
    if estimate.dims != plan.dims:
        raise ParameterError(f"estimate {estimate.dims} does not match plan {plan.dims}")
    union = plan.union()
    observed = np.asarray(union.values)
    energy = float(np.dot(observed, observed))
    if energy == 0.0:
        raise DomainError("stopping rule undefined: all observed values are zero")
    diff = observed - estimate.values[union.i, union.j, union.k]
    return float(np.dot(diff, diff) / energy)

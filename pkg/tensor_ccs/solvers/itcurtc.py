# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Iterative t-CUR tensor completion (ITCURTC) on a t-CCS plan.

The estimate T_k is never formed densely. Only its restriction to the R slab
[T_k]_{I,:,:} and the C slab [T_k]_{:,J,:} is kept, together with the factors
C_k, U_k, R_k and the Fourier-domain singular vectors of U_k.
"""

import csv
import logging
import math
import time
from typing import Any, Dict, List, Optional, TextIO, Tuple

import numpy as np
from pydantic import ConfigDict, Field

from tensor_ccs._fourier import real_part, tubes_fft, tubes_ifft
from tensor_ccs.exceptions import (
    DivergenceError,
    DomainError,
    ParameterError,
    PlanValidationError,
)
from tensor_ccs.metrics import rel_error
from tensor_ccs.models import SolverConfig, SolverReport, TensorCcsModel
from tensor_ccs.sampling import CcsPlan, slab_observations
from tensor_ccs.spectral import compose_svd, global_cutoff, slice_svds, truncate_svd
from tensor_ccs.tcur import CurFactors
from tensor_ccs.tensor import DenseTensor3

logger = logging.getLogger(__name__)

WORK_TERMS = ("stopping", "R update", "C update", "U update", "assembly")


class WorkCounter:
    """Counted multiply-adds per iteration, split by the terms of one ITCURTC step."""

    def __init__(self) -> None:
        self.history: List[Dict[str, int]] = []
        self._current: Dict[str, int] = {}

    def start(self) -> None:
        self._current = dict.fromkeys(WORK_TERMS, 0)

    def add(self, term: str, count: float) -> None:
        self._current[term] = self._current.get(term, 0) + int(count)

    def finish(self) -> int:
        self.history.append(self._current)
        return self.total(-1)

    def total(self, iteration: int = -1) -> int:
        if not self.history:
            return 0
        return sum(self.history[iteration].values())

    @property
    def totals(self) -> List[int]:
        return [sum(entry.values()) for entry in self.history]


def _fft_work(entries: int, n3: int) -> float:
    return entries * max(1.0, math.log2(n3))


class ObservedBlocks:
    """Observations of a captured plan, indexed into the slab arrays of the solver state.

    Local row a of the R slab stands for I[a]; local column b of the C slab for J[b].
    Every coordinate of Omega_R union Omega_C is read from exactly one slab when
    the stopping rule is evaluated.
    """

    def __init__(self, plan: CcsPlan):
        if not plan.has_values:
            raise PlanValidationError(
                "plan carries no observed values", hint="call sampling.capture() first"
            )
        n1, n2, n3 = plan.dims
        self.dims = plan.dims
        self.rows = plan.I.as_array()
        self.cols = plan.J.as_array()
        self.rows_c = plan.I.complement()
        self.cols_c = plan.J.complement()
        self.shape_R = (self.rows.size, n2, n3)
        self.shape_C = (n1, self.cols.size, n3)
        self.shape_U = (self.rows.size, self.cols.size, n3)

        local_R = slab_observations(plan, "R")
        local_C = slab_observations(plan, "C")
        self.lin_R = np.ravel_multi_index((local_R.i, local_R.j, local_R.k), self.shape_R)
        self.vals_R = np.asarray(local_R.values)
        self.lin_C = np.ravel_multi_index((local_C.i, local_C.j, local_C.k), self.shape_C)
        self.vals_C = np.asarray(local_C.values)
        self.lin_U, self.vals_U = self._union_block(local_R.coords, self.vals_R, local_C.coords, self.vals_C)

        union = plan.union()
        first_row = np.full(n1, -1, dtype=np.intp)
        first_row[self.rows[::-1]] = np.arange(self.rows.size)[::-1]
        first_col = np.full(n2, -1, dtype=np.intp)
        first_col[self.cols[::-1]] = np.arange(self.cols.size)[::-1]
        from_R = first_row[union.i] >= 0
        self.gather_R = np.ravel_multi_index(
            (first_row[union.i[from_R]], union.j[from_R], union.k[from_R]), self.shape_R
        )
        self.gather_R_vals = np.asarray(union.values)[from_R]
        self.gather_C = np.ravel_multi_index(
            (union.i[~from_R], first_col[union.j[~from_R]], union.k[~from_R]), self.shape_C
        )
        self.gather_C_vals = np.asarray(union.values)[~from_R]
        self.size = len(union)
        self.energy = float(np.dot(union.values, union.values))

    def _union_block(
        self, coords_R: np.ndarray, vals_R: np.ndarray, coords_C: np.ndarray, vals_C: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        mask = np.zeros(self.shape_U, dtype=bool)
        values = np.zeros(self.shape_U)
        for b, j in enumerate(self.cols):
            hit = coords_R[:, 1] == j
            mask[coords_R[hit, 0], b, coords_R[hit, 2]] = True
            values[coords_R[hit, 0], b, coords_R[hit, 2]] = vals_R[hit]
        for a, i in enumerate(self.rows):
            hit = coords_C[:, 0] == i
            mask[a, coords_C[hit, 1], coords_C[hit, 2]] = True
            values[a, coords_C[hit, 1], coords_C[hit, 2]] = vals_C[hit]
        lin = np.flatnonzero(mask)
        return lin, values.ravel()[lin]

    def entries(self) -> int:
        """Stored index and value entries."""
        return 2 * (
            self.lin_R.size + self.lin_C.size + self.lin_U.size
            + self.gather_R.size + self.gather_C.size
        )


class ItcurtcState(TensorCcsModel):
    """Iterate k of ITCURTC.

    ``T_R`` and ``T_C`` hold the estimate T_k on the R and C slabs; ``w_hat``
    (n3, |I|, r) and ``vh_hat`` (n3, r, |J|) are the spectral singular vectors of U_k.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(0, ge=0, description="Iterations performed")
    C: np.ndarray = Field(..., description="C_k, n1 x |J| x n3")
    U: np.ndarray = Field(..., description="U_k, |I| x |J| x n3")
    R: np.ndarray = Field(..., description="R_k, |I| x n2 x n3")
    w_hat: np.ndarray = Field(..., description="Left spectral singular vectors of U_k")
    vh_hat: np.ndarray = Field(..., description="Right spectral singular vectors of U_k, conjugated")
    T_R: np.ndarray = Field(..., description="[T_k]_{I,:,:}")
    T_C: np.ndarray = Field(..., description="[T_k]_{:,J,:}")

    @classmethod
    def zeros(cls, plan: CcsPlan, r: int) -> "ItcurtcState":
        """The state T_0 = 0."""
        n1, n2, n3 = plan.dims
        size_I, size_J = len(plan.I), len(plan.J)
        return cls(
            C=np.zeros((n1, size_J, n3)),
            U=np.zeros((size_I, size_J, n3)),
            R=np.zeros((size_I, n2, n3)),
            w_hat=np.zeros((n3, size_I, r), dtype=np.complex128),
            vh_hat=np.zeros((n3, r, size_J), dtype=np.complex128),
            T_R=np.zeros((size_I, n2, n3)),
            T_C=np.zeros((n1, size_J, n3)),
        )

    def live_entries(self) -> int:
        """Array entries held by the state."""
        arrays = (self.C, self.U, self.R, self.w_hat, self.vh_hat, self.T_R, self.T_C)
        return int(sum(a.size for a in arrays))

    def factors(self, plan: CcsPlan) -> CurFactors:
        return CurFactors(
            C=DenseTensor3(self.C),
            U=DenseTensor3(self.U),
            R=DenseTensor3(self.R),
            I=plan.I,
            J=plan.J,
        )


def _check_rank(plan: CcsPlan, r: int) -> None:
    limit = min(len(plan.I), len(plan.J))
    if r > limit:
        raise ParameterError(
            f"target rank {r} exceeds min(|I|, |J|) = {limit}",
            hint="lower the rank or select more slices",
        )


def _gather(flat: np.ndarray, index: np.ndarray) -> np.ndarray:
    return flat.ravel()[index]


def stopping_e(
    plan: CcsPlan, state: ItcurtcState, blocks: Optional[ObservedBlocks] = None
) -> float:
    """Masked residual ratio e_k on Omega_R union Omega_C, each coordinate counted once.

    Raises:
        DomainError: If every observed value is zero
    """
    blocks = blocks or ObservedBlocks(plan)
    if blocks.energy == 0.0:
        raise DomainError("stopping rule undefined: all observed values are zero")
    diff_R = blocks.gather_R_vals - _gather(state.T_R, blocks.gather_R)
    diff_C = blocks.gather_C_vals - _gather(state.T_C, blocks.gather_C)
    return float((np.dot(diff_R, diff_R) + np.dot(diff_C, diff_C)) / blocks.energy)


def itcurtc_step(
    state: ItcurtcState,
    plan: CcsPlan,
    cfg: SolverConfig,
    blocks: Optional[ObservedBlocks] = None,
    work: Optional[WorkCounter] = None,
) -> ItcurtcState:
    """One ITCURTC iteration: slab gradient steps, truncated U update, implicit assembly.

    Args:
        state: Iterate k
        plan: Captured t-CCS plan
        cfg: Solver configuration (rank and step sizes)
        blocks: Precomputed observation indexing for ``plan``
        work: Counter receiving the multiply-adds of this step

    Returns:
        Iterate k + 1
    """
    _check_rank(plan, cfg.r)
    blocks = blocks or ObservedBlocks(plan)
    eta_R, eta_C, eta_U = cfg.step_sizes(plan.p_R, plan.p_C)
    rows, cols, rows_c, cols_c = blocks.rows, blocks.cols, blocks.rows_c, blocks.cols_c
    n3 = plan.dims[2]

    R_next = state.T_R.copy()
    R_next.ravel()[blocks.lin_R] += eta_R * (blocks.vals_R - _gather(state.T_R, blocks.lin_R))
    C_next = state.T_C.copy()
    C_next.ravel()[blocks.lin_C] += eta_C * (blocks.vals_C - _gather(state.T_C, blocks.lin_C))

    U_step = np.ascontiguousarray(state.T_R[:, cols, :])
    U_step.ravel()[blocks.lin_U] += eta_U * (blocks.vals_U - _gather(U_step, blocks.lin_U))
    svd = slice_svds(tubes_fft(U_step), symmetric=True)
    kept = truncate_svd(svd, cfg.r, cutoff=global_cutoff(svd.s))
    U_next = real_part(tubes_ifft(compose_svd(kept)), "U update")

    R_next[:, cols, :] = U_next
    C_next[rows, :, :] = U_next

    # [T_{k+1}]_{Ic,J} = C[Ic] * V V^T and [T_{k+1}]_{I,Jc} = W W^T * R[:, Jc]
    T_R = np.empty_like(R_next)
    T_C = np.empty_like(C_next)
    if rows_c.size:
        c_stack = np.moveaxis(tubes_fft(C_next[rows_c, :, :]), 2, 0)
        v = np.conj(np.swapaxes(kept.vh, 1, 2))
        c_proj = np.matmul(np.matmul(c_stack, v), kept.vh)
        T_C[rows_c, :, :] = real_part(tubes_ifft(np.moveaxis(c_proj, 0, 2)), "C assembly")
    if cols_c.size:
        r_stack = np.moveaxis(tubes_fft(R_next[:, cols_c, :]), 2, 0)
        wh = np.conj(np.swapaxes(kept.u, 1, 2))
        r_proj = np.matmul(kept.u, np.matmul(wh, r_stack))
        T_R[:, cols_c, :] = real_part(tubes_ifft(np.moveaxis(r_proj, 0, 2)), "R assembly")
    T_R[:, cols, :] = U_next
    T_C[rows, :, :] = U_next

    if work is not None:
        size_I, size_J, r = rows.size, cols.size, cfg.r
        work.add("R update", blocks.lin_R.size)
        work.add("C update", blocks.lin_C.size)
        block = size_I * size_J * n3
        work.add("U update", blocks.lin_U.size + 2 * _fft_work(block, n3)
                 + block * min(size_I, size_J) + block * r)
        work.add("assembly", 2 * _fft_work((rows_c.size * size_J + size_I * cols_c.size) * n3, n3)
                 + 2 * r * n3 * (rows_c.size * size_J + size_I * cols_c.size))
        work.add("stopping", blocks.size)

    return ItcurtcState(
        k=state.k + 1,
        C=C_next,
        U=U_next,
        R=R_next,
        w_hat=kept.u,
        vh_hat=kept.vh,
        T_R=T_R,
        T_C=T_C,
    )


def _write_trace(writer: Any, k: int, e: float, eps: Optional[float]) -> None:
    row = [k, repr(e)] if eps is None else [k, repr(e), repr(eps)]
    writer.writerow(row)


def itcurtc(
    plan: CcsPlan,
    cfg: SolverConfig,
    truth: Optional[DenseTensor3] = None,
    trace_sink: Optional[TextIO] = None,
    work: Optional[WorkCounter] = None,
) -> Tuple[CurFactors, SolverReport]:
    """Complete a tensor from a captured t-CCS plan.

    Starts from T_0 = 0 and iterates until e_k <= ``cfg.tol``, eps_k <= ``cfg.eps_tol``
    (ground truth only) or ``cfg.max_iter`` is reached.

    Args:
        plan: Plan with observed values (see :func:`tensor_ccs.sampling.capture`)
        cfg: Solver configuration
        truth: Ground truth; when given the report carries eps_k
        trace_sink: Text stream receiving one CSV row ``k,e_k[,eps_k]`` per iteration
            when ``cfg.trace`` is set
        work: Counter receiving per-iteration multiply-adds

    Returns:
        Final factors (C, U, R) and the iteration report

    Raises:
        ParameterError: If the rank exceeds min(|I|, |J|)
        DivergenceError: If e_k stays above ``divergence_factor`` e_0 for
            ``divergence_window`` consecutive iterations
    """
    _check_rank(plan, cfg.r)
    if truth is not None and truth.dims != plan.dims:
        raise ParameterError(f"truth {truth.dims} does not match plan {plan.dims}")
    blocks = ObservedBlocks(plan)
    state = ItcurtcState.zeros(plan, cfg.r)
    started = time.perf_counter()

    if blocks.size == 0:
        logger.warning("no observations; returning zero factors")
        report = SolverReport(
            iterations=0, converged=False, tol=cfg.tol,
            eps_history=[] if truth is not None else None,
        )
        return state.factors(plan), report

    steps = cfg.step_sizes(plan.p_R, plan.p_C)
    logger.info(
        "ITCURTC on %s: |I|=%d |J|=%d |Omega|=%d r=%d steps=(%.3g, %.3g, %.3g)",
        plan.dims, len(plan.I), len(plan.J), blocks.size, cfg.r, *steps,
    )
    writer = csv.writer(trace_sink, lineterminator="\n") if cfg.trace and trace_sink else None
    if writer is not None:
        writer.writerow(["k", "e_k", "eps_k"] if truth is not None else ["k", "e_k"])

    e_0 = stopping_e(plan, state, blocks)
    e_history: List[float] = []
    eps_history: Optional[List[float]] = [] if truth is not None else None
    work_history: List[int] = []
    counter = work if work is not None else WorkCounter()
    growing = 0
    converged = False

    while state.k < cfg.max_iter:
        counter.start()
        state = itcurtc_step(state, plan, cfg, blocks, counter)
        e_k = stopping_e(plan, state, blocks)
        work_history.append(counter.finish())
        e_history.append(e_k)
        eps_k = None
        if eps_history is not None:
            eps_k = rel_error(truth, state.factors(plan))
            eps_history.append(eps_k)
        if writer is not None:
            _write_trace(writer, state.k, e_k, eps_k)
        logger.debug("iteration %d: e_k=%.3e%s", state.k, e_k,
                     "" if eps_k is None else f" eps_k={eps_k:.3e}")

        if e_k <= cfg.tol or (eps_k is not None and cfg.eps_tol is not None and eps_k <= cfg.eps_tol):
            converged = True
            break
        growing = growing + 1 if e_k > cfg.divergence_factor * e_0 else 0
        if growing >= cfg.divergence_window:
            raise DivergenceError(
                f"e_k exceeded {cfg.divergence_factor:g} e_0 for {growing} iterations "
                f"(e_k={e_k:.3e} at iteration {state.k})",
                step_sizes=steps,
            )

    report = SolverReport(
        iterations=state.k,
        e_history=e_history,
        eps_history=eps_history,
        work_history=work_history,
        converged=converged,
        tol=cfg.tol,
        wall_seconds=time.perf_counter() - started,
    )
    logger.info(
        "ITCURTC %s after %d iterations: e_k=%.3e",
        "converged" if converged else "stopped", report.iterations, e_history[-1],
    )
    return state.factors(plan), report

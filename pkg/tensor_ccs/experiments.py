# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Synthetic data, experiment drivers and completion jobs.

Every trial draws from its own generator, derived from the master seed and
the (cell, trial) pair, so results do not depend on the worker count.
"""

import csv
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from pathlib import Path
from typing import (
    Any,
    Callable,
    Iterable,
    List,
    Literal,
    Optional,
    Sequence,
    TextIO,
    Tuple,
    TypeVar,
)

import numpy as np
from pydantic import Field

from tensor_ccs.exceptions import CapExceededError, ConvergenceFailure, ParameterError, TensorCcsError
from tensor_ccs.io import read_plan, read_tensor, write_factors, write_tensor
from tensor_ccs.metrics import DENSE_ASSEMBLY_MAX_ENTRIES, rel_error
from tensor_ccs.models import ExperimentConfig, SolverConfig, TensorCcsModel
from tensor_ccs.sampling import (
    CcsPlan,
    capture,
    make_ccs_plan,
    make_rng,
    overall_rate,
    probability_for_rate,
    trial_rng,
    trial_seed,
)
from tensor_ccs.solvers import iht_complete, itcurtc, tstc, tstc_residual
from tensor_ccs.tcur import cur_reconstruct
from tensor_ccs.tensor import DenseTensor3, tprod

logger = logging.getLogger(__name__)

PHASE_HEADER = ("r", "delta", "p", "alpha_mean", "successes", "trials")
CONVERGENCE_HEADER = ("k", "eps_mean")
REPORT_HEADER = ("solver", "iterations", "converged", "e_final", "eps", "alpha", "wall_seconds")

TrialResult = TypeVar("TrialResult")


def gen_lowrank(
    n1: int,
    n2: int,
    n3: int,
    r: int,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DenseTensor3:
    """Random tensor A * B with standard Gaussian A (n1 x r x n3) and B (r x n2 x n3).

    The result has tubal rank ``r`` with probability one.
    """
    if min(n1, n2, n3) < 1:
        raise ParameterError(f"dimensions must be positive, got {(n1, n2, n3)}")
    if not 1 <= r <= min(n1, n2):
        raise ParameterError(f"rank {r} must lie in [1, {min(n1, n2)}]")
    if rng is None:
        rng = make_rng(seed)
    a = DenseTensor3(rng.standard_normal((n1, r, n3)), copy=False)
    b = DenseTensor3(rng.standard_normal((r, n2, n3)), copy=False)
    return tprod(a, b)


def slice_count(delta: float, n: int) -> int:
    """Number of slices for a fraction ``delta`` of ``n``, at least one."""
    return min(n, max(1, int(round(delta * n))))


class PhaseCell(TensorCcsModel):
    """Aggregated outcome of one (r, delta, p) cell."""

    r: int = Field(..., ge=1)
    delta: float = Field(..., gt=0, le=1)
    p: float = Field(..., gt=0, le=1)
    alpha_mean: float = Field(..., ge=0, le=1, description="Mean exact overall sampling rate")
    successes: int = Field(..., ge=0)
    trials: int = Field(..., ge=1)


class ConvergencePoint(TensorCcsModel):
    """Mean relative error at one iteration across seeds."""

    k: int = Field(..., ge=0)
    eps_mean: float = Field(..., ge=0)


def _phase_grid(cfg: ExperimentConfig) -> List[Tuple[int, float, float]]:
    cells = []
    for r in cfg.ranks:
        for delta in cfg.deltas:
            if cfg.alphas is None:
                cells.extend((r, delta, p) for p in cfg.probabilities)
                continue
            for alpha in cfg.alphas:
                try:
                    cells.append((r, delta, probability_for_rate(alpha, delta)))
                except ParameterError as e:
                    logger.warning("skipping alpha=%g at delta=%g: %s", alpha, delta, e)
    return cells


def _solver_config(cfg: ExperimentConfig, r: int, eps_tol: Optional[float] = None) -> SolverConfig:
    return SolverConfig(
        r=r, tol=cfg.solver_tol, eps_tol=eps_tol, max_iter=cfg.max_iter, step_rule=cfg.step_rule
    )


def _draw_trial(
    cfg: ExperimentConfig, cell: int, trial: int, r: int, delta: float, p: float
) -> Tuple[DenseTensor3, CcsPlan]:
    """Draw the truth and plan of one trial; the plan records the seed that replays both."""
    n1, n2, n3 = cfg.dims
    seed = trial_seed(cfg.seed, cell, trial)
    rng = trial_rng(cfg.seed, cell, trial)
    logger.debug("cell %d trial %d: seed %d", cell, trial, seed)
    truth = gen_lowrank(n1, n2, n3, r, rng=rng)
    plan = make_ccs_plan(
        cfg.dims, slice_count(delta, n1), slice_count(delta, n2), p, p, rng=rng, seed=seed
    )
    return truth, capture(truth, plan)


def _phase_trial(cfg: ExperimentConfig, cell: int, trial: int, r: int, delta: float, p: float) -> Tuple[bool, float]:
    truth, plan = _draw_trial(cfg, cell, trial, r, delta, p)
    alpha = overall_rate(plan)
    try:
        factors, _ = itcurtc(plan, _solver_config(cfg, r))
        eps = rel_error(truth, factors)
    except TensorCcsError as e:
        logger.debug("cell %d trial %d failed: %s", cell, trial, e)
        return False, alpha
    return bool(eps <= cfg.success_tol), alpha


def _map_trials(
    cfg: ExperimentConfig, fn: Callable[..., TrialResult], jobs: Sequence[Tuple[Any, ...]]
) -> List[TrialResult]:
    if cfg.workers == 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def run_phase_transition(cfg: ExperimentConfig) -> List[PhaseCell]:
    """Success counts of ITCURTC over the (r, delta, p) grid.

    A trial succeeds when eps <= ``cfg.success_tol``; solver errors count as
    failures. When ``cfg.alphas`` is set the probability grid is replaced by the
    common slab probability reaching each target rate. Cells are returned in
    grid order.
    """
    grid = _phase_grid(cfg)
    logger.info("phase transition on %s: %d cells x %d trials", cfg.dims, len(grid), cfg.trials)
    jobs = [
        (cfg, cell, trial, r, delta, p)
        for cell, (r, delta, p) in enumerate(grid)
        for trial in range(cfg.trials)
    ]
    outcomes = _map_trials(cfg, _phase_trial, jobs)
    cells = []
    for cell, (r, delta, p) in enumerate(grid):
        chunk = outcomes[cell * cfg.trials:(cell + 1) * cfg.trials]
        successes = sum(1 for ok, _ in chunk if ok)
        alpha_mean = math.fsum(alpha for _, alpha in chunk) / cfg.trials
        logger.info(
            "cell r=%d delta=%g p=%g: %d/%d successes, alpha=%.4f",
            r, delta, p, successes, cfg.trials, alpha_mean,
        )
        cells.append(
            PhaseCell(r=r, delta=delta, p=p, alpha_mean=alpha_mean, successes=successes, trials=cfg.trials)
        )
    return cells


def _convergence_trial(cfg: ExperimentConfig, trial: int, r: int, delta: float, p: float, eps_tol: float) -> List[float]:
    truth, plan = _draw_trial(cfg, 0, trial, r, delta, p)
    _, report = itcurtc(plan, _solver_config(cfg, r, eps_tol=eps_tol), truth=truth)
    return [1.0] + list(report.eps_history or [])


def run_convergence(cfg: ExperimentConfig) -> List[ConvergencePoint]:
    """Mean eps_k over ``cfg.trials`` seeds at the first rank, delta and rate of the grid.

    Row k = 0 is the zero start (eps = 1). Runs that stop early carry their last
    eps forward so every row averages all seeds. Solver errors propagate.
    """
    r, delta = cfg.ranks[0], cfg.deltas[0]
    p = probability_for_rate(cfg.alphas[0], delta) if cfg.alphas else cfg.probabilities[0]
    eps_tol = cfg.eps_tol if cfg.eps_tol is not None else 1e-6
    logger.info("convergence study on %s: r=%d delta=%g p=%.4g, %d seeds", cfg.dims, r, delta, p, cfg.trials)
    histories = _map_trials(
        cfg, _convergence_trial, [(cfg, trial, r, delta, p, eps_tol) for trial in range(cfg.trials)]
    )
    length = max(len(h) for h in histories)
    padded = np.array([h + [h[-1]] * (length - len(h)) for h in histories])
    means = padded.mean(axis=0)
    return [ConvergencePoint(k=k, eps_mean=float(eps)) for k, eps in enumerate(means)]


def _csv_value(value: object) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_rows(sink: TextIO, header: Tuple[str, ...], rows: Iterable[TensorCcsModel]) -> None:
    """Write models as CSV, one column per header field, floats in round-trip form."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_value(getattr(row, name)) for name in header])


def write_csv(
    path: Optional[Path],
    header: Tuple[str, ...],
    rows: Iterable[TensorCcsModel],
    stdout: Optional[TextIO] = None,
) -> None:
    """Write rows to ``path``, or to ``stdout`` (default sys.stdout) when no path is given."""
    if path is None:
        write_rows(stdout or sys.stdout, header, rows)
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_rows(f, header, rows)


class CompletionJob(TensorCcsModel):
    """One completion of a tensor file."""

    tensor: Path = Field(..., description="T3D1 tensor to sample from and score against")
    out: Path = Field(..., description="Output tensor file, or factor directory for ITCURTC")
    r: int = Field(..., ge=1, description="Target tubal rank")
    solver: Literal["itcurtc", "tstc"] = Field("itcurtc")
    plan: Optional[Path] = Field(None, description="Plan file; drawn from the arguments below if omitted")
    delta: Optional[float] = Field(None, gt=0, le=1, description="Slice fraction for a drawn plan")
    p_R: float = Field(0.5, gt=0, le=1)
    p_C: float = Field(0.5, gt=0, le=1)
    seed: Optional[int] = Field(None, ge=0)
    tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(500, ge=1)
    step_rule: Literal["unit", "unbiased"] = Field("unit")
    dense: bool = Field(False, description="Write the assembled dense estimate for ITCURTC")
    max_dense_entries: int = Field(DENSE_ASSEMBLY_MAX_ENTRIES, ge=1)
    report: Optional[Path] = Field(None, description="Report CSV destination")
    trace: Optional[Path] = Field(None, description="Per-iteration trace CSV (ITCURTC)")
    require_convergence: bool = Field(False)


class CompletionReport(TensorCcsModel):
    solver: str
    iterations: int
    converged: bool
    e_final: float
    eps: float
    alpha: float
    wall_seconds: float


def _job_plan(job: CompletionJob, truth: DenseTensor3) -> CcsPlan:
    if job.plan is not None:
        plan = read_plan(job.plan)
        if plan.dims != truth.dims:
            raise ParameterError(f"plan {plan.dims} does not match tensor {truth.dims}")
    else:
        if job.delta is None:
            raise ParameterError("no plan given", hint="pass --plan or --delta with --prob-r/--prob-c")
        plan = make_ccs_plan(
            truth.dims,
            slice_count(job.delta, truth.n1),
            slice_count(job.delta, truth.n2),
            job.p_R,
            job.p_C,
            seed=job.seed,
        )
    return plan if plan.has_values else capture(truth, plan)


def run_complete(job: CompletionJob) -> CompletionReport:
    """Sample, complete and score one tensor file.

    Raises:
        ParseError: If an input file is malformed
        CapExceededError: If a dense output would exceed ``max_dense_entries``
        ConvergenceFailure: If convergence was required and the cap was hit
    """
    truth = read_tensor(job.tensor)
    plan = _job_plan(job, truth)
    alpha = overall_rate(plan)
    if job.solver == "tstc":
        started = time.perf_counter()
        estimate = tstc(
            plan, job.r, subsolver=partial(iht_complete, max_iter=job.max_iter),
            max_entries=job.max_dense_entries,
        )
        elapsed = time.perf_counter() - started
        e_final = tstc_residual(plan, estimate)
        if job.require_convergence and e_final > job.tol:
            raise ConvergenceFailure(
                "TSTC estimate does not fit the observations to the tolerance",
                iterations=job.max_iter, last_error=e_final,
            )
        write_tensor(job.out, estimate)
        report = CompletionReport(
            solver="tstc", iterations=0, converged=e_final <= job.tol, e_final=e_final,
            eps=rel_error(truth, estimate), alpha=alpha, wall_seconds=elapsed,
        )
    else:
        cfg = SolverConfig(
            r=job.r, tol=job.tol, max_iter=job.max_iter, step_rule=job.step_rule,
            trace=job.trace is not None,
        )
        if job.dense and plan.size > job.max_dense_entries:
            raise CapExceededError(
                f"dense output of {plan.dims} exceeds the cap",
                requested=plan.size, cap=job.max_dense_entries,
                hint="omit --dense to write factors instead",
            )
        if job.trace is not None:
            with open(job.trace, "w", encoding="utf-8", newline="") as sink:
                factors, solved = itcurtc(plan, cfg, truth=truth, trace_sink=sink)
        else:
            factors, solved = itcurtc(plan, cfg)
        if job.require_convergence and not solved.converged:
            raise ConvergenceFailure(
                "ITCURTC did not reach the tolerance",
                iterations=solved.iterations,
                last_error=solved.e_history[-1] if solved.e_history else 1.0,
            )
        if job.dense:
            write_tensor(job.out, cur_reconstruct(factors))
        else:
            write_factors(job.out, factors)
        report = CompletionReport(
            solver="itcurtc",
            iterations=solved.iterations,
            converged=solved.converged,
            e_final=solved.e_history[-1] if solved.e_history else 1.0,
            eps=rel_error(truth, factors, max_dense_entries=job.max_dense_entries),
            alpha=alpha,
            wall_seconds=solved.wall_seconds,
        )
    logger.info("%s finished: eps=%.3e alpha=%.4f", report.solver, report.eps, report.alpha)
    if job.report is not None:
        write_csv(job.report, REPORT_HEADER, [report])
    return report

# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Configuration and report models."""

from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Dims = Tuple[int, int, int]


class TensorCcsModel(BaseModel):
    """Base model for all tensor-ccs configuration and report models."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class MultiRank(TensorCcsModel):
    """Per-slice numerical ranks of the Fourier-domain frontal slices."""

    per_slice: Tuple[int, ...] = Field(..., description="Rank r_k of each spectral slice")
    tubal: int = Field(..., ge=0, description="Tubal rank, the largest r_k")
    sum: int = Field(..., ge=0, description="Sum of the per-slice ranks")
    tolerance: float = Field(..., ge=0, description="Absolute singular value cutoff used")

    @model_validator(mode="after")
    def _check_consistency(self) -> "MultiRank":
        if self.per_slice and self.tubal != max(self.per_slice):
            raise ValueError("tubal rank must equal the largest per-slice rank")
        if self.sum != sum(self.per_slice):
            raise ValueError("sum must equal the sum of per-slice ranks")
        return self


class SolverConfig(TensorCcsModel):
    """Inputs of the ITCURTC iteration besides the observations."""

    r: int = Field(..., ge=1, description="Target tubal rank")
    eta_R: Optional[float] = Field(None, gt=0, description="Step size of the R update")
    eta_C: Optional[float] = Field(None, gt=0, description="Step size of the C update")
    eta_U: Optional[float] = Field(None, gt=0, description="Step size of the U update")
    step_rule: Literal["unit", "unbiased"] = Field(
        "unit", description="Default step sizes when none are given explicitly"
    )
    tol: float = Field(1e-10, gt=0, description="Stopping threshold on e_k")
    eps_tol: Optional[float] = Field(
        None, gt=0, description="Stop once eps_k falls below this (requires ground truth)"
    )
    max_iter: int = Field(500, ge=1, description="Iteration cap")
    trace: bool = Field(False, description="Emit one CSV line per iteration to the trace sink")
    divergence_window: int = Field(10, ge=1, description="Consecutive growing iterations tolerated")
    divergence_factor: float = Field(10.0, gt=1, description="Growth over e_0 counted as diverging")

    def step_sizes(self, p_R: float, p_C: float) -> Tuple[float, float, float]:
        """Resolve (eta_R, eta_C, eta_U) for a plan's sampling probabilities."""
        if self.step_rule == "unbiased":
            defaults = (
                1.0 / p_R if p_R > 0 else 1.0,
                1.0 / p_C if p_C > 0 else 1.0,
                1.0 / max(p_R, p_C) if max(p_R, p_C) > 0 else 1.0,
            )
        else:
            defaults = (1.0, 1.0, 1.0)
        return (
            self.eta_R if self.eta_R is not None else defaults[0],
            self.eta_C if self.eta_C is not None else defaults[1],
            self.eta_U if self.eta_U is not None else defaults[2],
        )


class SolverReport(TensorCcsModel):
    """Iterate history of a solver run."""

    iterations: int = Field(..., ge=0, description="Iterations performed")
    e_history: List[float] = Field(default_factory=list, description="Masked residual ratio e_k")
    eps_history: Optional[List[float]] = Field(
        None, description="Relative error eps_k, present when ground truth was supplied"
    )
    work_history: List[int] = Field(
        default_factory=list, description="Counted multiply-adds per iteration"
    )
    converged: bool = Field(..., description="Whether the stopping rule was met")
    tol: float = Field(..., gt=0, description="Stopping threshold the run used")
    wall_seconds: float = Field(0.0, ge=0, description="Elapsed wall-clock time")

    @model_validator(mode="after")
    def _check_history(self) -> "SolverReport":
        if len(self.e_history) != self.iterations:
            raise ValueError("e_history must hold one entry per iteration")
        if self.eps_history is not None and len(self.eps_history) != self.iterations:
            raise ValueError("eps_history must hold one entry per iteration")
        if self.converged and not self.e_history:
            raise ValueError("a converged run must have performed an iteration")
        if self.converged and self.eps_history is None and self.e_history[-1] > self.tol:
            raise ValueError("a converged run must end with e_k <= tol")
        return self


class ExactnessReport(TensorCcsModel):
    """Outcome of checking a t-CUR decomposition against its source tensor."""

    exact: bool = Field(..., description="Relative reconstruction error within tolerance")
    multirank_match: bool = Field(..., description="rank_m(C) == rank_m(R) == rank_m(T)")
    rel_error: float = Field(..., ge=0, description="Relative Frobenius reconstruction error")
    multirank: Tuple[int, ...] = Field(..., description="Multi-rank of the source tensor")


class BoundInputs(TensorCcsModel):
    """Symbols entering the sampling-complexity formulas."""

    n1: int = Field(..., ge=1)
    n2: int = Field(..., ge=1)
    n3: int = Field(..., ge=1)
    r: int = Field(..., ge=1, description="Tubal rank")
    mu0: float = Field(..., gt=0, description="Incoherence parameter")
    kappa: float = Field(1.0, gt=0, description="Condition number")
    beta: float = Field(..., ge=1, description="Slack constant")
    rvec_inf: int = Field(..., ge=1, description="Largest per-slice rank")
    rvec_1: int = Field(..., ge=1, description="Sum of per-slice ranks")
    size_I: Optional[int] = Field(None, ge=1, description="Planned |I| for the p_R bound")
    size_J: Optional[int] = Field(None, ge=1, description="Planned |J| for the p_C bound")

    @model_validator(mode="after")
    def _check_ranks(self) -> "BoundInputs":
        if self.rvec_inf > self.rvec_1:
            raise ValueError("rvec_inf cannot exceed rvec_1")
        return self


class SamplingBounds(TensorCcsModel):
    """Required slab sizes / probabilities and the success-probability lower bound."""

    mode: Literal["ccs", "tcur", "bernoulli"]
    size_I: Optional[int] = Field(None, description="Minimum |I| (clamped to n1)")
    size_J: Optional[int] = Field(None, description="Minimum |J| (clamped to n2)")
    p_R: Optional[float] = Field(None, description="Minimum p_R (clamped to 1)")
    p_C: Optional[float] = Field(None, description="Minimum p_C (clamped to 1)")
    p: Optional[float] = Field(None, description="Minimum Bernoulli probability (clamped to 1)")
    success_probability: float = Field(..., description="Lower bound, clamped into [0, 1]")
    success_probability_simplified: Optional[float] = Field(
        None, description="Equal-dimension form of the probability (ccs mode, n1 == n2)"
    )
    raw: Dict[str, float] = Field(default_factory=dict, description="Unclamped formula values")
    clamped: bool = Field(False, description="Whether any output was clamped")


class IncoherenceTransferReport(TensorCcsModel):
    """Empirical subtensor incoherence against the transfer bounds."""

    applicable: bool = Field(..., description="Both subtensors keep the multi-rank of T")
    mu0: float = Field(..., description="Incoherence of T")
    kappa: float = Field(..., description="Condition number of T")
    mu_C: Optional[float] = Field(None, description="Incoherence of C = T[:, J, :]")
    mu_R: Optional[float] = Field(None, description="Incoherence of R = T[I, :, :]")
    bound_C: Optional[float] = Field(None, description="kappa^2 ||V_J^+||^2 |J|/n2 mu0")
    bound_R: Optional[float] = Field(None, description="kappa^2 ||W_I^+||^2 |I|/n1 mu0")
    holds: Optional[bool] = Field(None, description="mu_C <= bound_C and mu_R <= bound_R")
    uniform_bound: Optional[float] = Field(
        None, description="(25/4) kappa^2 mu0 when the uniform-sampling size conditions hold"
    )
    uniform_holds: Optional[bool] = Field(None, description="Both mu within uniform_bound")


class ExperimentConfig(TensorCcsModel):
    """Grid and seeds of a phase-transition or convergence study."""

    kind: Literal["phase", "convergence"] = Field("phase")
    dims: Dims = Field((60, 60, 16), description="Tensor dimensions (n1, n2, n3)")
    ranks: List[int] = Field([2, 5, 7], min_length=1, description="Tubal ranks")
    deltas: List[float] = Field(
        [0.15, 0.25, 0.35, 0.5], min_length=1, description="Slice fractions |I|/n1 = |J|/n2"
    )
    probabilities: List[float] = Field(
        [round(0.1 * k, 1) for k in range(1, 10)], min_length=1,
        description="Bernoulli probabilities on the slabs",
    )
    alphas: Optional[List[float]] = Field(
        None, min_length=1, description="Overall rate targets; replace the probability grid"
    )
    trials: int = Field(25, ge=1, description="Independent trials per cell")
    seed: int = Field(0, ge=0, description="Master seed")
    success_tol: float = Field(1e-3, gt=0, description="Success threshold on eps")
    solver_tol: float = Field(1e-10, gt=0, description="Solver stopping threshold on e_k")
    eps_tol: Optional[float] = Field(None, gt=0, description="Stop on eps_k (convergence runs)")
    max_iter: int = Field(500, ge=1)
    step_rule: Literal["unit", "unbiased"] = Field("unit")
    workers: int = Field(1, ge=1, description="Parallel trials")
    output: Optional[Path] = Field(None, description="CSV destination")

    @model_validator(mode="after")
    def _check_grids(self) -> "ExperimentConfig":
        if any(d <= 0 or d > 1 for d in self.deltas):
            raise ValueError("deltas must lie in (0, 1]")
        if any(p <= 0 or p > 1 for p in self.probabilities):
            raise ValueError("probabilities must lie in (0, 1]")
        if self.alphas is not None and any(a <= 0 or a > 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1]")
        if any(n < 1 for n in self.dims):
            raise ValueError("dims must be positive")
        if any(r < 1 for r in self.ranks):
            raise ValueError("ranks must be positive")
        return self

# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Sampling-complexity bounds and the subtensor incoherence check.

All logarithms are natural. Bounds are reported clamped into their admissible
ranges, with the unclamped formula values kept in ``raw``.
"""

import logging
import math
from typing import Dict, Literal, Optional, Tuple

from tensor_ccs.exceptions import DomainError, ParameterError
from tensor_ccs.models import BoundInputs, IncoherenceTransferReport, SamplingBounds
from tensor_ccs.spectral import condition_number, incoherence_mu0, ranks, spectral_norm, tpinv, tsvd
from tensor_ccs.tensor import DenseTensor3, IndexSet, subtensor

logger = logging.getLogger(__name__)

BoundMode = Literal["ccs", "tcur", "bernoulli"]

UNIFORM_TRANSFER_FACTOR = 25.0 / 4.0


def _clamp_size(value: float, limit: int) -> Tuple[int, bool]:
    size = max(1, math.ceil(value))
    return (limit, True) if size > limit else (size, False)


def _clamp_probability(value: float) -> Tuple[float, bool]:
    if value > 1.0:
        return 1.0, True
    if value < 0.0:
        return 0.0, True
    return value, False


def _power_ratio(log_base: float, base_log: float, exponent: float) -> float:
    # log_base / base^exponent, evaluated in log space
    if log_base <= 0.0:
        return 0.0
    return math.exp(math.log(log_base) - exponent * base_log)


def _tcur_bounds(inputs: BoundInputs) -> SamplingBounds:
    factor = 2.0 * inputs.beta * inputs.mu0 * inputs.rvec_inf
    raw_I = factor * math.log(inputs.n1 * inputs.rvec_1)
    raw_J = factor * math.log(inputs.n2 * inputs.rvec_1)
    raw_prob = 1.0 - inputs.n1 ** (-inputs.beta) - inputs.n2 ** (-inputs.beta)
    size_I, clamp_I = _clamp_size(raw_I, inputs.n1)
    size_J, clamp_J = _clamp_size(raw_J, inputs.n2)
    prob, clamp_p = _clamp_probability(raw_prob)
    return SamplingBounds(
        mode="tcur",
        size_I=size_I,
        size_J=size_J,
        success_probability=prob,
        raw={"size_I": raw_I, "size_J": raw_J, "success_probability": raw_prob},
        clamped=clamp_I or clamp_J or clamp_p,
    )


def _bernoulli_bounds(inputs: BoundInputs) -> SamplingBounds:
    n1, n2, n3 = inputs.n1, inputs.n2, inputs.n3
    total = n1 * n3 + n2 * n3
    log_total = math.log(total)
    raw_p = 256.0 * inputs.beta * (n1 + n2) * inputs.mu0 * inputs.r * log_total**2 / (n1 * n2)
    raw_prob = 1.0 - 3.0 * _power_ratio(log_total, log_total, 4.0 * inputs.beta - 2.0)
    p, clamp_p = _clamp_probability(raw_p)
    prob, clamp_prob = _clamp_probability(raw_prob)
    return SamplingBounds(
        mode="bernoulli",
        p=p,
        success_probability=prob,
        raw={"p": raw_p, "success_probability": raw_prob},
        clamped=clamp_p or clamp_prob,
    )


def _ccs_bounds(inputs: BoundInputs) -> SamplingBounds:
    if inputs.beta <= 1.0:
        raise ParameterError(
            f"cross-concentrated bounds need beta > 1, got {inputs.beta}",
            hint="use mode 'tcur' or 'bernoulli' for beta = 1",
        )
    n1, n2, n3 = inputs.n1, inputs.n2, inputs.n3
    beta, kappa2 = inputs.beta, inputs.kappa**2
    strength = inputs.mu0 * inputs.r * kappa2
    total = n1 * n3 + n2 * n3
    raw_size = 3200.0 * beta * strength * math.log(total) ** 2
    size_I, clamp_I = _clamp_size(raw_size, n1)
    size_J, clamp_J = _clamp_size(raw_size, n2)
    planned_I = inputs.size_I if inputs.size_I is not None else size_I
    planned_J = inputs.size_J if inputs.size_J is not None else size_J
    log_sq = math.log((n1 + n2) * n3) ** 2
    raw_p_R = 1600.0 * (planned_I + n2) * strength * log_sq / (planned_I * n2)
    raw_p_C = 1600.0 * (planned_J + n1) * strength * log_sq / (planned_J * n1)
    p_R, clamp_R = _clamp_probability(raw_p_R)
    p_C, clamp_C = _clamp_probability(raw_p_C)

    log_total = math.log(total)
    exponent = 4.0 * beta - 2.0
    rows_total = n1 * n3 + planned_J * n3
    cols_total = n2 * n3 + planned_I * n3
    raw_prob = (
        1.0
        - math.exp(-800.0 * beta * kappa2 * math.log(n2) * log_total)
        - math.exp(-800.0 * beta * kappa2 * math.log(n1) * log_total)
        - 3.0 * _power_ratio(math.log(rows_total), math.log(rows_total), exponent)
        - 3.0 * _power_ratio(math.log(cols_total), math.log(cols_total), exponent)
    )
    prob, clamp_prob = _clamp_probability(raw_prob)
    raw: Dict[str, float] = {
        "size_I": raw_size,
        "size_J": raw_size,
        "p_R": raw_p_R,
        "p_C": raw_p_C,
        "success_probability": raw_prob,
    }
    simplified: Optional[float] = None
    if n1 == n2:
        n = n1
        raw_simplified = 1.0 - 6.0 * _power_ratio(math.log(2 * n * n3), math.log(n * n3), exponent)
        raw["success_probability_simplified"] = raw_simplified
        simplified, _ = _clamp_probability(raw_simplified)
    return SamplingBounds(
        mode="ccs",
        size_I=size_I,
        size_J=size_J,
        p_R=p_R,
        p_C=p_C,
        success_probability=prob,
        success_probability_simplified=simplified,
        raw=raw,
        clamped=clamp_I or clamp_J or clamp_R or clamp_C or clamp_prob,
    )


def bounds(inputs: BoundInputs, mode: BoundMode) -> SamplingBounds:
    """Evaluate a sampling-complexity bound.

    Args:
        inputs: Dimensions, rank statistics, incoherence, condition number and beta
        mode: ``"ccs"`` for cross-concentrated sampling, ``"tcur"`` for uniform
            slice selection with exact t-CUR, ``"bernoulli"`` for entrywise sampling

    Returns:
        Required slice counts and/or probabilities with the success-probability lower bound

    Raises:
        ParameterError: If beta is not admissible for the mode or the mode is unknown
    """
    if mode == "ccs":
        return _ccs_bounds(inputs)
    if mode == "tcur":
        return _tcur_bounds(inputs)
    if mode == "bernoulli":
        return _bernoulli_bounds(inputs)
    raise ParameterError(f"unknown bound mode {mode!r}", hint="use ccs, tcur or bernoulli")


def bound_inputs_for(t: DenseTensor3, beta: float, r: Optional[int] = None) -> BoundInputs:
    """Measure the bound symbols (rank statistics, mu0, kappa) on a tensor."""
    multirank = ranks(t)
    if multirank.tubal == 0:
        raise DomainError("bounds are undefined for the zero tensor")
    rank = r if r is not None else multirank.tubal
    return BoundInputs(
        n1=t.n1,
        n2=t.n2,
        n3=t.n3,
        r=rank,
        mu0=incoherence_mu0(t, rank),
        kappa=condition_number(t),
        beta=beta,
        rvec_inf=multirank.tubal,
        rvec_1=multirank.sum,
    )


def subtensor_incoherence_check(
    t: DenseTensor3, I: IndexSet, J: IndexSet, beta: float = 1.0
) -> IncoherenceTransferReport:
    """Compare the incoherence of C = T[:, J, :] and R = T[I, :, :] with the transfer bounds.

    The bounds are kappa^2 ||V_J^+||^2 (|J|/n2) mu0 for C and kappa^2 ||W_I^+||^2 (|I|/n1) mu0
    for R, where W and V come from the compact t-SVD of ``t``. When |I| and |J| meet the
    uniform slice-count condition the (25/4) kappa^2 mu0 bound is evaluated as well.

    Raises:
        DomainError: If ``t`` is the zero tensor
    """
    target = ranks(t)
    if target.tubal == 0:
        raise DomainError("incoherence is undefined for the zero tensor")
    r = target.tubal
    mu0 = incoherence_mu0(t, r)
    kappa = condition_number(t)
    C = subtensor(t, cols=J)
    R = subtensor(t, rows=I)
    applicable = (
        ranks(C).per_slice == target.per_slice and ranks(R).per_slice == target.per_slice
    )
    if not applicable:
        logger.debug("subtensor lost multi-rank; transfer bound not applicable")
        return IncoherenceTransferReport(applicable=False, mu0=mu0, kappa=kappa)

    factors = tsvd(t, r)
    V_J = subtensor(factors.V, rows=J)
    W_I = subtensor(factors.W, rows=I)
    bound_C = kappa**2 * spectral_norm(tpinv(V_J)) ** 2 * len(J) / t.n2 * mu0
    bound_R = kappa**2 * spectral_norm(tpinv(W_I)) ** 2 * len(I) / t.n1 * mu0
    mu_C = incoherence_mu0(C, r)
    mu_R = incoherence_mu0(R, r)

    uniform_bound = None
    uniform_holds = None
    uniform = bounds(
        BoundInputs(
            n1=t.n1, n2=t.n2, n3=t.n3, r=r, mu0=mu0, kappa=kappa, beta=beta,
            rvec_inf=target.tubal, rvec_1=target.sum,
        ),
        "tcur",
    )
    if len(I) >= uniform.raw["size_I"] and len(J) >= uniform.raw["size_J"]:
        uniform_bound = UNIFORM_TRANSFER_FACTOR * kappa**2 * mu0
        uniform_holds = mu_C <= uniform_bound and mu_R <= uniform_bound

    return IncoherenceTransferReport(
        applicable=True,
        mu0=mu0,
        kappa=kappa,
        mu_C=mu_C,
        mu_R=mu_R,
        bound_C=bound_C,
        bound_R=bound_R,
        holds=mu_C <= bound_C and mu_R <= bound_R,
        uniform_bound=uniform_bound,
        uniform_holds=uniform_holds,
    )

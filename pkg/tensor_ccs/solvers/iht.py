# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Iterative hard thresholding on the tubal rank: X <- H_r(X + eta P_Omega(T - X))."""

import logging

import numpy as np

from tensor_ccs._fourier import real_part, tubes_fft, tubes_ifft
from tensor_ccs.exceptions import DivergenceError, DomainError, ParameterError
from tensor_ccs.sampling import ObservationSet
from tensor_ccs.spectral import compose_svd, global_cutoff, slice_svds, truncate_svd
from tensor_ccs.tensor import DenseTensor3

logger = logging.getLogger(__name__)

IHT_TOL = 1e-8
IHT_MAX_ITER = 500
DIVERGENCE_WINDOW = 10
DIVERGENCE_FACTOR = 10.0


def _hard_threshold(values: np.ndarray, r: int) -> np.ndarray:
    svd = slice_svds(tubes_fft(values), symmetric=True)
    kept = truncate_svd(svd, r, cutoff=global_cutoff(svd.s))
    return real_part(tubes_ifft(compose_svd(kept)), "hard threshold")


def iht_complete(
    omega: ObservationSet,
    r: int,
    eta: float = 1.0,
    tol: float = IHT_TOL,
    max_iter: int = IHT_MAX_ITER,
) -> DenseTensor3:
    """Complete a low-tubal-rank tensor from the observations in ``omega``.

    Starts from zero and stops once ||P_Omega(T - X)||_F / ||P_Omega(T)||_F <= ``tol``
    or after ``max_iter`` iterations.

    Args:
        omega: Observations with values, in the coordinates of the tensor to complete
        r: Target tubal rank
        eta: Step size
        tol: Stopping threshold on the masked relative residual
        max_iter: Iteration cap

    Returns:
        The last iterate

    Raises:
        ParameterError: If r is outside [1, min(n1, n2)] or ``omega`` has no values
        DomainError: If there are no observations or all observed values are zero
        DivergenceError: If the residual stays above ten times its initial value
    """
    n1, n2, _ = omega.shape
    if not 1 <= r <= min(n1, n2):
        raise ParameterError(f"rank {r} must lie in [1, {min(n1, n2)}] for shape {omega.shape}")
    if eta <= 0 or tol <= 0 or max_iter < 1:
        raise ParameterError("eta and tol must be positive and max_iter at least 1")
    if omega.values is None:
        raise ParameterError("observations carry no values")
    if len(omega) == 0:
        raise DomainError("no observations to complete from")
    observed = np.asarray(omega.values)
    scale = float(np.linalg.norm(observed))
    if scale == 0.0:
        raise DomainError("all observed values are zero")

    index = np.ravel_multi_index((omega.i, omega.j, omega.k), omega.shape)
    x = np.zeros(omega.shape)
    residual = 1.0
    growing = 0
    iteration = 0
    for iteration in range(1, max_iter + 1):
        step = x.copy()
        step.ravel()[index] += eta * (observed - x.ravel()[index])
        x = _hard_threshold(step, r)
        residual = float(np.linalg.norm(observed - x.ravel()[index])) / scale
        logger.debug("IHT iteration %d: residual %.3e", iteration, residual)
        if residual <= tol:
            break
        growing = growing + 1 if residual > DIVERGENCE_FACTOR else 0
        if growing >= DIVERGENCE_WINDOW:
            raise DivergenceError(
                f"IHT residual {residual:.3e} kept growing at iteration {iteration}",
                step_sizes=(eta,),
            )
    else:
        logger.info("IHT stopped at max_iter=%d with residual %.3e", max_iter, residual)
    logger.debug("IHT finished after %d iterations, residual %.3e", iteration, residual)
    return DenseTensor3(x, copy=False)

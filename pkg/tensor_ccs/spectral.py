# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Fourier-domain linear algebra: t-SVD, truncation, pseudo-inverse, ranks and norms.

Every operation works on the frontal slices of the mode-3 DFT. Per-slice SVDs
use LAPACK ``gesdd`` and fall back to ``gesvd`` when it fails to converge.
"""

import logging
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import ConfigDict, Field

from tensor_ccs._fourier import real_part, tubes_fft, tubes_ifft
from tensor_ccs.exceptions import DomainError, NumericalError, ParameterError
from tensor_ccs.models import Dims, MultiRank, TensorCcsModel
from tensor_ccs.tensor import DenseTensor3

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-9
SYMMETRY_ATOL = 1e-10

RankSpec = Union[int, str]


class SpectralSlices(TensorCcsModel):
    """Mode-3 DFT of a tensor, kept in (n1, n2, n3) layout."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: Dims = Field(..., description="Dimensions (n1, n2, n3) of the source tensor")
    slices: np.ndarray = Field(..., description="Complex spectrum, slice k at [:, :, k]")

    def slice(self, k: int) -> np.ndarray:
        return self.slices[:, :, k]

    def is_conjugate_symmetric(self, atol: float = SYMMETRY_ATOL) -> bool:
        """Whether slice k is the conjugate of slice (n3 - k) mod n3 for every k."""
        n3 = self.dims[2]
        mirror = (-np.arange(n3)) % n3
        scale = max(1.0, float(np.max(np.abs(self.slices), initial=0.0)))
        gap = np.abs(self.slices - np.conj(self.slices[:, :, mirror]))
        return bool(np.max(gap, initial=0.0) <= atol * scale)


class TSvdFactors(TensorCcsModel):
    """Compact t-SVD factors T = W * S * V^T."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    W: DenseTensor3 = Field(..., description="Orthogonal left factor, n1 x r x n3")
    S: DenseTensor3 = Field(..., description="f-diagonal core, r x r x n3")
    V: DenseTensor3 = Field(..., description="Orthogonal right factor, n2 x r x n3")
    r: int = Field(..., ge=1, description="Target tubal rank")


class SliceSvd(NamedTuple):
    """Thin SVDs of all spectral slices, stacked along the first axis.

    ``u`` is (n3, n1, m), ``s`` is (n3, m) and ``vh`` is (n3, m, n2) with
    m = min(n1, n2) unless truncated.
    """

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray


def dft3(t: DenseTensor3) -> SpectralSlices:
    """Unnormalized forward DFT along mode 3."""
    return SpectralSlices(dims=t.dims, slices=tubes_fft(t.values))


def idft3(spectrum: SpectralSlices) -> DenseTensor3:
    """Inverse DFT along mode 3 (divides by n3)."""
    return DenseTensor3(real_part(tubes_ifft(spectrum.slices), "idft3"), copy=False)


def _robust_svd(matrix: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return scipy.linalg.svd(matrix, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.debug("gesdd failed on spectral slice %d, retrying with gesvd", k)
    try:
        return scipy.linalg.svd(matrix, full_matrices=False, lapack_driver="gesvd")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError("SVD did not converge", slice_index=k) from e


def _self_conjugate(k: int, n3: int) -> bool:
    return (n3 - k) % n3 == k


def slice_svds(hat: np.ndarray, symmetric: bool = False) -> SliceSvd:
    """Thin SVD of every frontal slice of a spectrum in (n1, n2, n3) layout.

    With ``symmetric`` the spectrum is assumed conjugate symmetric: slices
    0..n3//2 are factorised (self-conjugate slices in real arithmetic) and the
    remaining ones are mirrored, so the factors inverse-transform to real tensors.

    Raises:
        NumericalError: If an SVD fails on some slice (the index is reported)
    """
    n1, n2, n3 = hat.shape
    m = min(n1, n2)
    u = np.empty((n3, n1, m), dtype=np.complex128)
    s = np.empty((n3, m), dtype=np.float64)
    vh = np.empty((n3, m, n2), dtype=np.complex128)
    todo = range(n3 // 2 + 1) if symmetric else range(n3)
    for k in todo:
        matrix = hat[:, :, k]
        if symmetric and _self_conjugate(k, n3):
            matrix = np.ascontiguousarray(matrix.real)
        u[k], s[k], vh[k] = _robust_svd(matrix, k)
        if symmetric and not _self_conjugate(k, n3):
            mirror = n3 - k
            u[mirror] = np.conj(u[k])
            s[mirror] = s[k]
            vh[mirror] = np.conj(vh[k])
    return SliceSvd(u=u, s=s, vh=vh)


def global_cutoff(s: np.ndarray, rtol: float = RANK_RTOL) -> float:
    """Absolute singular-value cutoff: ``rtol`` times the largest singular value of any slice."""
    if s.size == 0:
        return 0.0
    return rtol * float(np.max(s))


def truncate_svd(svd: SliceSvd, r: int, cutoff: float = 0.0) -> SliceSvd:
    """Keep the leading ``r`` triplets per slice; directions with sigma <= cutoff are zeroed.

    Zeroed directions carry zero columns in ``u`` and zero rows in ``vh``, so
    projections built from the factors ignore them.
    """
    u = svd.u[:, :, :r].copy()
    s = svd.s[:, :r].copy()
    vh = svd.vh[:, :r, :].copy()
    kept = s > cutoff
    if not np.all(kept):
        s *= kept
        u *= kept[:, None, :]
        vh *= kept[:, :, None]
    return SliceSvd(u=u, s=s, vh=vh)


def compose_svd(svd: SliceSvd) -> np.ndarray:
    """Rebuild a spectrum in (n1, n2, n3) layout from stacked SVD factors."""
    stack = np.matmul(svd.u * svd.s[:, None, :], svd.vh)
    return np.moveaxis(stack, 0, 2)


def _check_rank(r: int, t: DenseTensor3) -> None:
    limit = min(t.n1, t.n2)
    if not 1 <= r <= limit:
        raise ParameterError(
            f"rank {r} must lie in [1, {limit}] for a {t.n1}x{t.n2}x{t.n3} tensor",
        )


def tsvd(t: DenseTensor3, r: RankSpec = "auto", symmetric: bool = True) -> TSvdFactors:
    """Compact t-SVD of ``t``.

    Args:
        t: Tensor to factor
        r: Target tubal rank, or ``"auto"`` for the numerical tubal rank
        symmetric: Factor half the spectrum and mirror the rest

    Returns:
        Factors W (n1 x r x n3), S (r x r x n3) and V (n2 x r x n3)

    Raises:
        ParameterError: If r is outside [1, min(n1, n2)]
        NumericalError: If a slice SVD fails
    """
    svd = slice_svds(tubes_fft(t.values), symmetric=symmetric)
    if r == "auto":
        rank = max(1, _multirank_from(svd.s, RANK_RTOL).tubal)
    elif isinstance(r, int):
        _check_rank(r, t)
        rank = r
    else:
        raise ParameterError(f"rank must be a positive integer or 'auto', got {r!r}")
    kept = truncate_svd(svd, rank)
    n3 = t.n3
    w_hat = np.moveaxis(kept.u, 0, 2)
    v_hat = np.moveaxis(np.conj(np.swapaxes(kept.vh, 1, 2)), 0, 2)
    s_hat = np.zeros((rank, rank, n3), dtype=np.complex128)
    diagonal = np.arange(rank)
    s_hat[diagonal, diagonal, :] = kept.s.T
    return TSvdFactors(
        W=DenseTensor3(real_part(tubes_ifft(w_hat), "t-SVD factor W"), copy=False),
        S=DenseTensor3(real_part(tubes_ifft(s_hat), "t-SVD factor S"), copy=False),
        V=DenseTensor3(real_part(tubes_ifft(v_hat), "t-SVD factor V"), copy=False),
        r=rank,
    )


def truncate_rank(t: DenseTensor3, r: int, symmetric: bool = False) -> DenseTensor3:
    """The operator H_r: keep the leading r singular triplets of every spectral slice."""
    _check_rank(r, t)
    svd = truncate_svd(slice_svds(tubes_fft(t.values), symmetric=symmetric), r)
    return DenseTensor3(real_part(tubes_ifft(compose_svd(svd)), "truncated t-SVD"), copy=False)


def _multirank_from(s: np.ndarray, rtol: float) -> MultiRank:
    cutoff = global_cutoff(s, rtol)
    per_slice = tuple(int(np.count_nonzero(row > cutoff)) for row in s)
    return MultiRank(
        per_slice=per_slice,
        tubal=max(per_slice, default=0),
        sum=sum(per_slice),
        tolerance=cutoff,
    )


def _singular_values(t: DenseTensor3, symmetric: bool) -> np.ndarray:
    hat = np.moveaxis(tubes_fft(t.values), 2, 0)
    if symmetric:
        return slice_svds(np.moveaxis(hat, 0, 2), symmetric=True).s
    try:
        return np.linalg.svd(hat, compute_uv=False)
    except np.linalg.LinAlgError:
        return slice_svds(np.moveaxis(hat, 0, 2)).s


def ranks(t: DenseTensor3, tol: Optional[float] = None, symmetric: bool = False) -> MultiRank:
    """Multi-rank of ``t``.

    Singular values count when they exceed ``tol`` times the largest singular
    value over all slices (default 1e-9).
    """
    return _multirank_from(_singular_values(t, symmetric), RANK_RTOL if tol is None else tol)


def tpinv(t: DenseTensor3, tol: Optional[float] = None, symmetric: bool = False) -> DenseTensor3:
    """Moore-Penrose inverse under the t-product, n2 x n1 x n3.

    Singular values at or below ``tol`` times the global largest one are treated as zero.
    """
    svd = slice_svds(tubes_fft(t.values), symmetric=symmetric)
    cutoff = global_cutoff(svd.s, RANK_RTOL if tol is None else tol)
    inverse = np.zeros_like(svd.s)
    keep = svd.s > cutoff
    inverse[keep] = 1.0 / svd.s[keep]
    v = np.conj(np.swapaxes(svd.vh, 1, 2))
    uh = np.conj(np.swapaxes(svd.u, 1, 2))
    stack = np.matmul(v * inverse[:, None, :], uh)
    return DenseTensor3(real_part(tubes_ifft(np.moveaxis(stack, 0, 2)), "tpinv"), copy=False)


def spectral_norm(t: DenseTensor3) -> float:
    """Largest singular value over all spectral slices (equals ||bcirc(t)||_2)."""
    return float(np.max(_singular_values(t, symmetric=False)))


def condition_number(t: DenseTensor3, tol: Optional[float] = None) -> float:
    """Ratio of the largest singular value to the smallest nonzero one, over all slices.

    Raises:
        DomainError: If ``t`` is the zero tensor
    """
    s = _singular_values(t, symmetric=False)
    cutoff = global_cutoff(s, RANK_RTOL if tol is None else tol)
    nonzero = s[s > cutoff]
    if nonzero.size == 0:
        raise DomainError("condition number of the zero tensor is undefined")
    return float(np.max(nonzero) / np.min(nonzero))


def tnn(t: DenseTensor3) -> float:
    """Tensor nuclear norm, (1/n3) times the sum of all spectral singular values."""
    return float(np.sum(_singular_values(t, symmetric=False)) / t.n3)


def incoherence_mu0(t: DenseTensor3, r: RankSpec = "auto") -> float:
    """Incoherence parameter mu0 from the compact t-SVD.

    For every spectral slice k only its leading r_k singular vectors are used;
    the result is the largest (n1/r) ||row i of W_k||^2 and (n2/r) ||row j of V_k||^2.

    Raises:
        DomainError: If ``t`` is the zero tensor
    """
    svd = slice_svds(tubes_fft(t.values))
    multirank = _multirank_from(svd.s, RANK_RTOL)
    if multirank.tubal == 0:
        raise DomainError("incoherence of the zero tensor is undefined")
    if r == "auto":
        rank = multirank.tubal
    elif isinstance(r, int):
        _check_rank(r, t)
        rank = r
    else:
        raise ParameterError(f"rank must be a positive integer or 'auto', got {r!r}")
    best_w = 0.0
    best_v = 0.0
    for k, r_k in enumerate(multirank.per_slice):
        keep = min(r_k, rank)
        if keep == 0:
            continue
        best_w = max(best_w, float(np.max(np.sum(np.abs(svd.u[k, :, :keep]) ** 2, axis=1))))
        best_v = max(best_v, float(np.max(np.sum(np.abs(svd.vh[k, :keep, :]) ** 2, axis=0))))
    return max(t.n1 / rank * best_w, t.n2 / rank * best_v)


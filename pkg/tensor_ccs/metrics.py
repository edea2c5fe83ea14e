# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Reconstruction quality: PSNR, slice-averaged SSIM and relative Frobenius error."""

import math
from typing import Union

import numpy as np
from skimage.metrics import structural_similarity

from tensor_ccs._fourier import tubes_fft
from tensor_ccs.exceptions import DomainError, ShapeError
from tensor_ccs.spectral import tpinv
from tensor_ccs.tcur import CurFactors, cur_reconstruct
from tensor_ccs.tensor import DenseTensor3, norm

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DENSE_ASSEMBLY_MAX_ENTRIES = 10**7


def _check_pair(truth: DenseTensor3, estimate: DenseTensor3) -> None:
    if truth.dims != estimate.dims:
        raise ShapeError(f"truth {truth.dims} and estimate {estimate.dims} differ in shape")


def psnr(truth: DenseTensor3, estimate: DenseTensor3) -> float:
    """Peak signal-to-noise ratio in dB, 10 log10(n1 n2 n3 ||T||_inf^2 / ||T - E||_F^2).

    Returns ``math.inf`` when the tensors are identical.

    Raises:
        DomainError: If ``truth`` is zero
    """
    _check_pair(truth, estimate)
    peak = norm(truth, "infinity")
    if peak == 0.0:
        raise DomainError("PSNR is undefined for a zero ground truth")
    squared_error = float(np.sum((truth.values - estimate.values) ** 2))
    if squared_error == 0.0:
        return math.inf
    return 10.0 * math.log10(truth.size * peak**2 / squared_error)


def _data_range(truth: DenseTensor3) -> float:
    values = truth.values
    spread = float(values.max() - values.min())
    if spread > 0.0:
        return spread
    peak = float(np.max(np.abs(values)))
    return peak if peak > 0.0 else 1.0


def ssim_avg(truth: DenseTensor3, estimate: DenseTensor3) -> float:
    """Single-scale SSIM of every frontal slice, averaged over slices.

    Gaussian window (sigma 1.5, 11 taps), K1 = 0.01, K2 = 0.03 and the dynamic
    range of the whole truth tensor. Slices smaller than 11 x 11 use the largest
    odd window that fits.
    """
    _check_pair(truth, estimate)
    n1, n2, n3 = truth.dims
    data_range = _data_range(truth)
    edge = min(n1, n2)
    win_size = SSIM_WINDOW if edge >= SSIM_WINDOW else edge - (1 - edge % 2)
    scores = [
        structural_similarity(
            truth.values[:, :, k],
            estimate.values[:, :, k],
            win_size=win_size,
            data_range=data_range,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            use_sample_covariance=False,
            K1=SSIM_K1,
            K2=SSIM_K2,
        )
        for k in range(n3)
    ]
    return float(np.mean(scores))


def _factor_squared_error(truth: DenseTensor3, factors: CurFactors) -> float:
    # ||T||^2 - 2<T, X> + ||X||^2 with X = C * U^+ * R, slice by slice in the Fourier domain
    n3 = truth.n3
    t_hat = np.moveaxis(tubes_fft(truth.values), 2, 0)
    c_hat = np.moveaxis(tubes_fft(factors.C.values), 2, 0)
    p_hat = np.moveaxis(tubes_fft(tpinv(factors.U).values), 2, 0)
    r_hat = np.moveaxis(tubes_fft(factors.R.values), 2, 0)
    left = np.matmul(c_hat, p_hat)
    cross = np.einsum("kij,kij->", np.conj(np.matmul(np.conj(np.swapaxes(left, 1, 2)), t_hat)), r_hat)
    gram_c = np.matmul(np.conj(np.swapaxes(c_hat, 1, 2)), c_hat)
    pr = np.matmul(p_hat, r_hat)
    gram_r = np.matmul(pr, np.conj(np.swapaxes(pr, 1, 2)))
    energy_x = np.einsum("kij,kji->", gram_c, gram_r)
    energy_t = np.sum(np.abs(t_hat) ** 2)
    total = (energy_t - 2.0 * cross.real + energy_x.real) / n3
    return max(float(total.real), 0.0)


def rel_error(
    truth: DenseTensor3,
    estimate: Union[DenseTensor3, CurFactors],
    max_dense_entries: int = DENSE_ASSEMBLY_MAX_ENTRIES,
) -> float:
    """Relative Frobenius error ||T - E||_F / ||T||_F.

    ``estimate`` may be t-CUR factors; they are assembled densely up to
    ``max_dense_entries`` entries and evaluated in the Fourier domain beyond.

    Raises:
        DomainError: If ``truth`` is zero
    """
    scale = norm(truth)
    if scale == 0.0:
        raise DomainError("relative error is undefined for a zero ground truth")
    if isinstance(estimate, CurFactors):
        if estimate.dims != truth.dims:
            raise ShapeError(f"truth {truth.dims} and factors {estimate.dims} differ in shape")
        if truth.size > max_dense_entries:
            return math.sqrt(_factor_squared_error(truth, estimate)) / scale
        estimate = cur_reconstruct(estimate)
    _check_pair(truth, estimate)
    return norm(truth - estimate) / scale

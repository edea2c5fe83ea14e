# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Mode-3 DFT kernels on raw arrays, shared by the tensor and spectral modules."""

import numpy as np
from scipy import fft as sp_fft

from tensor_ccs.exceptions import NumericalError

IMAG_RTOL = 1e-8
IMAG_ATOL = 1e-12


def tubes_fft(values: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along the third axis."""
    return sp_fft.fft(values, axis=2)


def tubes_ifft(spectrum: np.ndarray) -> np.ndarray:
    """Inverse DFT along the third axis (divides by n3)."""
    return sp_fft.ifft(spectrum, axis=2)


def real_part(values: np.ndarray, what: str = "inverse transform") -> np.ndarray:
    """Drop the imaginary residue of an inverse transform after checking it is rounding noise."""
    if not np.iscomplexobj(values):
        return np.asarray(values, dtype=np.float64)
    real = np.ascontiguousarray(values.real)
    residue = float(np.linalg.norm(values.imag))
    limit = IMAG_RTOL * float(np.linalg.norm(real)) + IMAG_ATOL
    if residue > limit:
        raise NumericalError(
            f"{what} left an imaginary residue of {residue:.3e} (limit {limit:.3e})",
            hint="the spectrum is not conjugate symmetric",
        )
    return real


def slice_matmul(a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """Multiply matching spectral slices: (n1, n2, n3) x (n2, n4, n3) -> (n1, n4, n3)."""
    product = np.matmul(np.moveaxis(a_hat, 2, 0), np.moveaxis(b_hat, 2, 0))
    return np.moveaxis(product, 0, 2)

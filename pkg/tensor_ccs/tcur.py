# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""t-CUR decomposition: T = C * U^+ * R from lateral slices, horizontal slices and their intersection."""

import logging
from typing import Optional

from pydantic import ConfigDict, Field, model_validator

from tensor_ccs.exceptions import ShapeError
from tensor_ccs.models import Dims, ExactnessReport, TensorCcsModel
from tensor_ccs.spectral import ranks, tpinv
from tensor_ccs.tensor import DenseTensor3, IndexSet, norm, subtensor, tprod

logger = logging.getLogger(__name__)

EXACT_RTOL = 1e-7


class CurFactors(TensorCcsModel):
    """Factors C = T[:, J, :], U = T[I, J, :] and R = T[I, :, :]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    C: DenseTensor3 = Field(..., description="Lateral slices, n1 x |J| x n3")
    U: DenseTensor3 = Field(..., description="Intersection, |I| x |J| x n3")
    R: DenseTensor3 = Field(..., description="Horizontal slices, |I| x n2 x n3")
    I: IndexSet = Field(..., description="Row indices of R and U")
    J: IndexSet = Field(..., description="Column indices of C and U")

    @model_validator(mode="after")
    def _check_dims(self) -> "CurFactors":
        n1, size_J, n3 = self.C.dims
        size_I, n2, n3_r = self.R.dims
        if self.U.dims != (size_I, size_J, n3) or n3_r != n3:
            raise ShapeError(
                f"inconsistent CUR factors C{self.C.dims} U{self.U.dims} R{self.R.dims}"
            )
        if (len(self.I), self.I.bound) != (size_I, n1) or (len(self.J), self.J.bound) != (size_J, n2):
            raise ShapeError("index sets do not match the factor dimensions")
        return self

    @property
    def dims(self) -> Dims:
        return (self.C.n1, self.R.n2, self.C.n3)


def extract_cur(t: DenseTensor3, I: IndexSet, J: IndexSet) -> CurFactors:
    """Extract C, U and R from ``t``.

    Raises:
        IndexRangeError: If an index set does not fit ``t``
    """
    return CurFactors(
        C=subtensor(t, cols=J),
        U=subtensor(t, rows=I, cols=J),
        R=subtensor(t, rows=I),
        I=I,
        J=J,
    )


def cur_reconstruct(factors: CurFactors, tol: Optional[float] = None) -> DenseTensor3:
    """Assemble C * U^+ * R densely."""
    return tprod(factors.C, tprod(tpinv(factors.U, tol=tol), factors.R))


def check_exact(
    factors: CurFactors, t: DenseTensor3, tol: float = EXACT_RTOL
) -> ExactnessReport:
    """Compare the t-CUR reconstruction with ``t`` and test the multi-rank condition.

    Args:
        factors: Factors extracted from ``t``
        t: Source tensor
        tol: Relative Frobenius error accepted as exact

    Returns:
        Exactness flag, multi-rank agreement of C, R and ``t``, and the relative error
    """
    if factors.dims != t.dims:
        raise ShapeError(f"factors of {factors.dims} do not match tensor {t.dims}")
    target = ranks(t)
    multirank_match = (
        ranks(factors.C).per_slice == target.per_slice
        and ranks(factors.R).per_slice == target.per_slice
    )
    error = norm(cur_reconstruct(factors) - t)
    scale = norm(t)
    rel_error = error / scale if scale > 0 else error
    report = ExactnessReport(
        exact=rel_error <= tol,
        multirank_match=multirank_match,
        rel_error=rel_error,
        multirank=target.per_slice,
    )
    logger.debug("t-CUR check: exact=%s match=%s rel_error=%.3e", report.exact, multirank_match, rel_error)
    return report

# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Dense third-order tensors and the t-product algebra."""

from typing import Iterable, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from tensor_ccs._fourier import real_part, slice_matmul, tubes_fft, tubes_ifft
from tensor_ccs.exceptions import (
    CapExceededError,
    IndexRangeError,
    ParameterError,
    ShapeError,
)
from tensor_ccs.models import Dims, TensorCcsModel

BCIRC_MAX_ENTRIES = 10**8

NormKind = Literal["frobenius", "infinity", "inf2"]


class DenseTensor3:
    """Real n1 x n2 x n3 tensor stored row-major in (i, j, k) order.

    Instances are immutable: the backing array is copied on construction and
    flagged read-only, so a tensor can be shared freely between threads.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Union[np.ndarray, Sequence[object]], *, copy: bool = True):
        if copy:
            array = np.array(values, dtype=np.float64, order="C")
        else:
            array = np.asarray(values, dtype=np.float64, order="C")
        if array.ndim != 3:
            raise ShapeError(f"expected a third-order array, got {array.ndim} dimension(s)")
        if min(array.shape) < 1:
            raise ShapeError(f"all dimensions must be positive, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ParameterError("tensor values must be finite (no NaN or Inf)")
        array.flags.writeable = False
        self._values = array

    @classmethod
    def zeros(cls, dims: Dims) -> "DenseTensor3":
        """Create the zero tensor of the given dimensions."""
        return cls(np.zeros(dims), copy=False)

    @classmethod
    def _wrap(cls, array: np.ndarray) -> "DenseTensor3":
        return cls(array, copy=False)

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the backing (n1, n2, n3) array."""
        return self._values

    @property
    def dims(self) -> Dims:
        n1, n2, n3 = self._values.shape
        return (n1, n2, n3)

    @property
    def n1(self) -> int:
        return int(self._values.shape[0])

    @property
    def n2(self) -> int:
        return int(self._values.shape[1])

    @property
    def n3(self) -> int:
        return int(self._values.shape[2])

    @property
    def size(self) -> int:
        return int(self._values.size)

    def frontal_slice(self, k: int) -> np.ndarray:
        """Return the k-th frontal slice [T]_{:,:,k} (0-based)."""
        if not 0 <= k < self.n3:
            raise IndexRangeError(f"frontal slice {k} out of range for n3={self.n3}")
        return self._values[:, :, k]

    def equals(self, other: "DenseTensor3") -> bool:
        """Bit-identical comparison."""
        return self.dims == other.dims and bool(np.array_equal(self._values, other._values))

    def _check_same_dims(self, other: "DenseTensor3") -> None:
        if self.dims != other.dims:
            raise ShapeError(f"dimension mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other: "DenseTensor3") -> "DenseTensor3":
        self._check_same_dims(other)
        return DenseTensor3._wrap(self._values + other._values)

    def __sub__(self, other: "DenseTensor3") -> "DenseTensor3":
        self._check_same_dims(other)
        return DenseTensor3._wrap(self._values - other._values)

    def __mul__(self, scalar: float) -> "DenseTensor3":
        return DenseTensor3._wrap(self._values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "DenseTensor3":
        return DenseTensor3._wrap(-self._values)

    def __repr__(self) -> str:
        n1, n2, n3 = self.dims
        return f"DenseTensor3({n1}x{n2}x{n3}, fro={norm(self):.6g})"


class IndexSet(TensorCcsModel):
    """Ordered 0-based indices into one tensor dimension."""

    model_config = ConfigDict(frozen=True)

    indices: Tuple[int, ...] = Field(..., description="Selected indices, in selection order")
    bound: int = Field(..., ge=1, description="Size of the indexed dimension")
    replacement: bool = Field(False, description="Drawn with replacement (duplicates allowed)")

    @model_validator(mode="after")
    def _check_indices(self) -> "IndexSet":
        for index in self.indices:
            if not 0 <= index < self.bound:
                raise IndexRangeError(f"index {index} out of range for dimension {self.bound}")
        if not self.replacement and len(set(self.indices)) != len(self.indices):
            raise ParameterError("duplicate indices require replacement=True")
        return self

    @classmethod
    def full(cls, bound: int) -> "IndexSet":
        """All indices 0..bound-1."""
        return cls(indices=tuple(range(bound)), bound=bound)

    @classmethod
    def of(cls, indices: Iterable[int], bound: int, replacement: bool = False) -> "IndexSet":
        return cls(indices=tuple(int(i) for i in indices), bound=bound, replacement=replacement)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def complement(self) -> np.ndarray:
        """Sorted indices of the dimension not in the set."""
        keep = np.ones(self.bound, dtype=bool)
        keep[self.as_array()] = False
        return np.flatnonzero(keep)

    def __len__(self) -> int:
        return len(self.indices)


def unfold(t: DenseTensor3) -> np.ndarray:
    """Stack the frontal slices vertically into an (n1*n3) x n2 matrix."""
    n1, n2, n3 = t.dims
    return np.ascontiguousarray(np.moveaxis(t.values, 2, 0).reshape(n3 * n1, n2))


def fold(matrix: np.ndarray, dims: Dims) -> DenseTensor3:
    """Inverse of :func:`unfold`."""
    n1, n2, n3 = dims
    matrix = np.asarray(matrix)
    if matrix.shape != (n1 * n3, n2):
        raise ShapeError(f"cannot fold a {matrix.shape} matrix into {dims}")
    return DenseTensor3(np.moveaxis(matrix.reshape(n3, n1, n2), 0, 2))


def bcirc(t: DenseTensor3, max_entries: int = BCIRC_MAX_ENTRIES) -> np.ndarray:
    """Block circulant matrix of ``t``; block (a, b) is frontal slice (a - b) mod n3.

    Materializes (n1 n3) x (n2 n3) entries and is meant for checking small cases.
    """
    n1, n2, n3 = t.dims
    entries = n1 * n3 * n2 * n3
    if entries > max_entries:
        raise CapExceededError(
            f"bcirc of {t.dims} needs {entries} entries", requested=entries, cap=max_entries
        )
    offsets = (np.arange(n3)[:, None] - np.arange(n3)[None, :]) % n3
    blocks = np.moveaxis(t.values, 2, 0)[offsets]
    return blocks.transpose(0, 2, 1, 3).reshape(n3 * n1, n3 * n2)


def tprod(a: DenseTensor3, b: DenseTensor3) -> DenseTensor3:
    """t-product a * b, computed slicewise in the Fourier domain."""
    if a.n2 != b.n1 or a.n3 != b.n3:
        raise ShapeError(f"t-product needs (n1, n2, n3) x (n2, n4, n3), got {a.dims} x {b.dims}")
    product = slice_matmul(tubes_fft(a.values), tubes_fft(b.values))
    return DenseTensor3._wrap(real_part(tubes_ifft(product), "t-product"))


def ttranspose(t: DenseTensor3) -> DenseTensor3:
    """Transpose every frontal slice and reverse the order of slices 2..n3."""
    order = (-np.arange(t.n3)) % t.n3
    return DenseTensor3(t.values.transpose(1, 0, 2)[:, :, order])


def identity_tensor(n: int, n3: int) -> DenseTensor3:
    """Identity tensor: first frontal slice is I_n, all others zero."""
    if n < 1 or n3 < 1:
        raise ParameterError(f"identity tensor needs n, n3 >= 1, got ({n}, {n3})")
    values = np.zeros((n, n, n3))
    values[:, :, 0] = np.eye(n)
    return DenseTensor3._wrap(values)


def norm(t: DenseTensor3, kind: NormKind = "frobenius") -> float:
    """Frobenius, entrywise-max or l_{inf,2} norm of a tensor.

    The l_{inf,2} norm is the largest Frobenius norm over horizontal slices
    [T]_{i,:,:} and lateral slices [T]_{:,j,:}.
    """
    values = t.values
    if kind == "frobenius":
        return float(np.linalg.norm(values.ravel()))
    if kind == "infinity":
        return float(np.max(np.abs(values)))
    if kind == "inf2":
        squares = values**2
        horizontal = np.sqrt(squares.sum(axis=(1, 2)))
        lateral = np.sqrt(squares.sum(axis=(0, 2)))
        return float(max(horizontal.max(), lateral.max()))
    raise ParameterError(f"unknown norm kind {kind!r}")


def inner_product(a: DenseTensor3, b: DenseTensor3) -> float:
    """Frobenius inner product sum_{ijk} a_ijk b_ijk."""
    if a.dims != b.dims:
        raise ShapeError(f"inner product needs equal dimensions, got {a.dims} and {b.dims}")
    return float(np.dot(a.values.ravel(), b.values.ravel()))


def _selector_array(selector: Optional[IndexSet], bound: int, axis: str) -> Optional[np.ndarray]:
    if selector is None:
        return None
    if selector.bound != bound:
        raise IndexRangeError(f"{axis} index set bound {selector.bound} does not match {bound}")
    return selector.as_array()


def subtensor(
    t: DenseTensor3,
    rows: Optional[IndexSet] = None,
    cols: Optional[IndexSet] = None,
) -> DenseTensor3:
    """Extract [T]_{I,:,:}, [T]_{:,J,:} or [T]_{I,J,:}; ``None`` selects everything.

    Index order and duplicates are preserved.
    """
    row_index = _selector_array(rows, t.n1, "row")
    col_index = _selector_array(cols, t.n2, "column")
    values = t.values
    if row_index is not None:
        values = values[row_index, :, :]
    if col_index is not None:
        values = values[:, col_index, :]
    return DenseTensor3(values)


def sampling_tensor(rows: IndexSet, n3: int) -> DenseTensor3:
    """Horizontal sampling tensor S_I = [I]_{I,:,:}, so that S_I * T = [T]_{I,:,:}."""
    return subtensor(identity_tensor(rows.bound, n3), rows=rows)

# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Observation sets, Bernoulli and cross-concentrated (t-CCS) sampling plans.

Random draws use numpy's counter-based Philox bit generator. A plan drawn from
``make_rng(seed)`` is reproducible on any platform running the same numpy.
"""

import logging
import math
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from tensor_ccs.exceptions import (
    IndexRangeError,
    ParameterError,
    PlanValidationError,
    ShapeError,
)
from tensor_ccs.models import Dims, TensorCcsModel
from tensor_ccs.tensor import DenseTensor3, IndexSet

logger = logging.getLogger(__name__)

Slab = Literal["R", "C"]


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Philox generator seeded from ``seed``."""
    return np.random.Generator(np.random.Philox(seed))


def trial_seed(master: int, cell: int, trial: int) -> int:
    """Seed of one trial, derived by hashing (master, cell, trial)."""
    sequence = np.random.SeedSequence(entropy=master, spawn_key=(cell, trial))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def trial_rng(master: int, cell: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial: ``make_rng(trial_seed(master, cell, trial))``."""
    return make_rng(trial_seed(master, cell, trial))


def _linear_index(coords: np.ndarray, shape: Dims) -> np.ndarray:
    n1, n2, _ = shape
    return coords[:, 2] * (n1 * n2) + coords[:, 0] * n2 + coords[:, 1]


class ObservationSet(TensorCcsModel):
    """Observed coordinates (i, j, k), sorted k-major then i then j, with optional values."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    shape: Dims = Field(..., description="Dimensions (n1, n2, n3) of the observed tensor")
    coords: np.ndarray = Field(..., description="Integer array of shape (m, 3), columns i, j, k")
    values: Optional[np.ndarray] = Field(None, description="Observed values, one per coordinate")
    dedup: bool = Field(True, description="Coordinates are unique")

    @model_validator(mode="after")
    def _check_coords(self) -> "ObservationSet":
        coords = self.coords
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ShapeError(f"coordinates must have shape (m, 3), got {coords.shape}")
        if coords.size and (np.any(coords < 0) or np.any(coords >= np.asarray(self.shape))):
            raise IndexRangeError(f"observed coordinate outside tensor of shape {self.shape}")
        if self.values is not None and self.values.shape != (coords.shape[0],):
            raise ShapeError(
                f"{self.values.shape[0]} values for {coords.shape[0]} coordinates"
            )
        if self.dedup and coords.shape[0] > 1:
            linear = _linear_index(coords, self.shape)
            if np.any(np.diff(linear) <= 0):
                raise PlanValidationError("coordinates must be unique and sorted k-major")
        return self

    @classmethod
    def from_coords(
        cls,
        shape: Dims,
        coords: np.ndarray,
        values: Optional[np.ndarray] = None,
        dedup: bool = True,
    ) -> "ObservationSet":
        """Sort coordinates into canonical order, dropping duplicates when ``dedup`` is set.

        Raises:
            IndexRangeError: If a coordinate lies outside ``shape``
            PlanValidationError: If a duplicated coordinate carries two different values
        """
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        if coords.size and (np.any(coords < 0) or np.any(coords >= np.asarray(shape))):
            raise IndexRangeError(f"observed coordinate outside tensor of shape {shape}")
        linear = _linear_index(coords, shape)
        order = np.argsort(linear, kind="stable")
        coords = coords[order]
        linear = linear[order]
        if values is not None:
            values = np.asarray(values, dtype=np.float64)[order]
        if dedup and coords.shape[0] > 1:
            first = np.concatenate(([True], np.diff(linear) != 0))
            if values is not None:
                groups = np.cumsum(first) - 1
                if np.any(values != values[first][groups]):
                    raise PlanValidationError("duplicate coordinate with conflicting values")
                values = values[first]
            coords = coords[first]
        coords.flags.writeable = False
        if values is not None:
            values.flags.writeable = False
        return cls(shape=shape, coords=coords, values=values, dedup=dedup)

    @classmethod
    def empty(cls, shape: Dims, with_values: bool = False) -> "ObservationSet":
        return cls(
            shape=shape,
            coords=np.zeros((0, 3), dtype=np.int64),
            values=np.zeros(0) if with_values else None,
        )

    @property
    def has_values(self) -> bool:
        return self.values is not None

    @property
    def i(self) -> np.ndarray:
        return self.coords[:, 0]

    @property
    def j(self) -> np.ndarray:
        return self.coords[:, 1]

    @property
    def k(self) -> np.ndarray:
        return self.coords[:, 2]

    def linear_index(self) -> np.ndarray:
        """Position of every coordinate in k-major order."""
        return _linear_index(self.coords, self.shape)

    def with_values(self, values: np.ndarray) -> "ObservationSet":
        values = np.array(values, dtype=np.float64)
        values.flags.writeable = False
        return ObservationSet(shape=self.shape, coords=self.coords, values=values, dedup=self.dedup)

    def union(self, other: "ObservationSet") -> "ObservationSet":
        """Coordinate union; values on shared coordinates are stored once."""
        if self.shape != other.shape:
            raise ShapeError(f"cannot merge observations of {self.shape} and {other.shape}")
        coords = np.concatenate([self.coords, other.coords])
        values = None
        if self.has_values and other.has_values:
            values = np.concatenate([self.values, other.values])
        return ObservationSet.from_coords(self.shape, coords, values)

    def __len__(self) -> int:
        return int(self.coords.shape[0])


class CcsPlan(TensorCcsModel):
    """Output of one t-CCS draw: slice index sets and the two slab masks."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: Dims = Field(..., description="Tensor dimensions (n1, n2, n3)")
    I: IndexSet = Field(..., description="Selected horizontal slices")
    J: IndexSet = Field(..., description="Selected lateral slices")
    omega_R: ObservationSet = Field(..., description="Observations inside [T]_{I,:,:}, global coords")
    omega_C: ObservationSet = Field(..., description="Observations inside [T]_{:,J,:}, global coords")
    p_R: float = Field(..., ge=0, le=1, description="Bernoulli probability on the R slab")
    p_C: float = Field(..., ge=0, le=1, description="Bernoulli probability on the C slab")
    delta: Optional[float] = Field(None, description="|I|/n1 when it equals |J|/n2")
    seed: Optional[int] = Field(None, description="Seed the plan was drawn from")
    replacement: bool = Field(False, description="Slices drawn with replacement")

    @model_validator(mode="after")
    def _check_slabs(self) -> "CcsPlan":
        n1, n2, _ = self.dims
        if self.I.bound != n1 or self.J.bound != n2:
            raise PlanValidationError("index set bounds do not match the tensor dimensions")
        if self.omega_R.shape != self.dims or self.omega_C.shape != self.dims:
            raise PlanValidationError("slab observations do not match the tensor dimensions")
        if not np.all(np.isin(self.omega_R.i, self.I.as_array())):
            raise PlanValidationError("omega_R holds a coordinate outside the rows I")
        if not np.all(np.isin(self.omega_C.j, self.J.as_array())):
            raise PlanValidationError("omega_C holds a coordinate outside the columns J")
        if self.omega_R.has_values != self.omega_C.has_values:
            raise PlanValidationError("either both slabs or neither carry values")
        return self

    @property
    def has_values(self) -> bool:
        return self.omega_R.has_values

    @property
    def size(self) -> int:
        n1, n2, n3 = self.dims
        return n1 * n2 * n3

    def union(self) -> ObservationSet:
        """Omega_R union Omega_C, each coordinate once.

        Raises:
            PlanValidationError: If the two slabs disagree on a shared coordinate
        """
        return self.omega_R.union(self.omega_C)


def _check_probability(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")


def _check_dims(shape: Sequence[int]) -> Dims:
    if len(shape) != 3 or any(int(n) < 1 for n in shape):
        raise ShapeError(f"shape must hold three positive dimensions, got {tuple(shape)}")
    n1, n2, n3 = (int(n) for n in shape)
    return (n1, n2, n3)


def bernoulli_mask(shape: Sequence[int], p: float, rng: np.random.Generator) -> ObservationSet:
    """Include every coordinate independently with probability ``p``."""
    dims = _check_dims(shape)
    _check_probability(p, "p")
    n1, n2, n3 = dims
    k, i, j = np.nonzero(rng.random((n3, n1, n2)) < p)
    return ObservationSet.from_coords(dims, np.stack([i, j, k], axis=1))


def _slab_mask(
    dims: Dims, rows: np.ndarray, cols: np.ndarray, p: float, rng: np.random.Generator
) -> np.ndarray:
    n3 = dims[2]
    k, a, b = np.nonzero(rng.random((n3, rows.size, cols.size)) < p)
    return np.stack([rows[a], cols[b], k], axis=1)


def make_ccs_plan(
    shape: Sequence[int],
    size_I: int,
    size_J: int,
    p_R: float,
    p_C: float,
    replacement: bool = False,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> CcsPlan:
    """Draw a t-CCS plan.

    Rows I and columns J are drawn uniformly (with or without replacement),
    then Bernoulli masks are drawn on the R slab [T]_{I,:,:} with ``p_R`` and
    on the C slab [T]_{:,J,:} with ``p_C``. The two draws are independent and
    overlap on the (I, J) block.

    Args:
        shape: Tensor dimensions (n1, n2, n3)
        size_I: Number of horizontal slices |I|
        size_J: Number of lateral slices |J|
        p_R: Bernoulli probability on the R slab
        p_C: Bernoulli probability on the C slab
        replacement: Draw slices with replacement
        rng: Generator to draw from; defaults to ``make_rng(seed)``
        seed: Seed recorded in the plan (and used when ``rng`` is omitted)

    Returns:
        The plan, without values

    Raises:
        ParameterError: If sizes or probabilities are out of range
    """
    dims = _check_dims(shape)
    n1, n2, _ = dims
    _check_probability(p_R, "p_R")
    _check_probability(p_C, "p_C")
    if size_I < 1 or size_J < 1:
        raise ParameterError(f"slice counts must be positive, got |I|={size_I}, |J|={size_J}")
    if not replacement and (size_I > n1 or size_J > n2):
        raise ParameterError(
            f"cannot draw |I|={size_I}, |J|={size_J} distinct slices from {n1}x{n2}",
            hint="pass replacement=True or reduce the slice counts",
        )
    if rng is None:
        rng = make_rng(seed)
    rows = np.sort(rng.choice(n1, size=size_I, replace=replacement))
    cols = np.sort(rng.choice(n2, size=size_J, replace=replacement))
    omega_R = ObservationSet.from_coords(dims, _slab_mask(dims, np.unique(rows), np.arange(n2), p_R, rng))
    omega_C = ObservationSet.from_coords(dims, _slab_mask(dims, np.arange(n1), np.unique(cols), p_C, rng))
    delta = size_I / n1 if math.isclose(size_I / n1, size_J / n2) else None
    plan = CcsPlan(
        dims=dims,
        I=IndexSet.of(rows, n1, replacement=replacement),
        J=IndexSet.of(cols, n2, replacement=replacement),
        omega_R=omega_R,
        omega_C=omega_C,
        p_R=p_R,
        p_C=p_C,
        delta=delta,
        seed=seed,
        replacement=replacement,
    )
    logger.debug(
        "drew t-CCS plan %s: |I|=%d |J|=%d |omega_R|=%d |omega_C|=%d",
        dims, size_I, size_J, len(omega_R), len(omega_C),
    )
    return plan


def project(t: DenseTensor3, omega: ObservationSet) -> DenseTensor3:
    """Sampling operator P_Omega: keep observed entries of ``t``, zero the rest."""
    if t.dims != omega.shape:
        raise ShapeError(f"tensor {t.dims} does not match observation shape {omega.shape}")
    out = np.zeros(t.dims)
    i, j, k = omega.i, omega.j, omega.k
    out[i, j, k] = t.values[i, j, k]
    return DenseTensor3(out, copy=False)


def capture(t: DenseTensor3, plan: CcsPlan) -> CcsPlan:
    """Fill the plan's observations with the entries of ``t``."""
    if t.dims != plan.dims:
        raise ShapeError(f"tensor {t.dims} does not match plan dimensions {plan.dims}")

    def read(omega: ObservationSet) -> ObservationSet:
        return omega.with_values(t.values[omega.i, omega.j, omega.k])

    return plan.model_copy(update={"omega_R": read(plan.omega_R), "omega_C": read(plan.omega_C)})


def overall_rate(plan: CcsPlan) -> float:
    """Exact sampling rate |Omega_R union Omega_C| / (n1 n2 n3)."""
    union = np.union1d(plan.omega_R.linear_index(), plan.omega_C.linear_index())
    return float(union.size / plan.size)


def expected_rate(
    shape: Sequence[int], size_I: int, size_J: int, p_R: float, p_C: float
) -> float:
    """Expected overall rate of a plan with distinct slices, by inclusion-exclusion on the (I, J) block."""
    n1, n2, n3 = _check_dims(shape)
    expected = (
        p_R * size_I * n2 * n3 + p_C * n1 * size_J * n3 - p_R * p_C * size_I * size_J * n3
    )
    return expected / (n1 * n2 * n3)


def probability_for_rate(alpha: float, delta: float) -> float:
    """Common slab probability p giving expected rate ``alpha`` when |I|/n1 = |J|/n2 = delta.

    Solves 2 p delta - (p delta)^2 = alpha.

    Raises:
        ParameterError: If no p in (0, 1] reaches ``alpha``
    """
    if not 0.0 < alpha <= 1.0 or not 0.0 < delta <= 1.0:
        raise ParameterError(f"alpha and delta must lie in (0, 1], got {alpha}, {delta}")
    p = (1.0 - math.sqrt(1.0 - alpha)) / delta
    if p > 1.0 + 1e-12:
        limit = 2 * delta - delta**2
        raise ParameterError(
            f"rate {alpha} is out of reach at delta={delta}",
            hint=f"the largest rate for this delta is {limit:.4g}",
        )
    return min(p, 1.0)


def slab_observations(plan: CcsPlan, slab: Slab) -> ObservationSet:
    """Observations of one slab in slab-local coordinates.

    The R slab is |I| x n2 x n3 with local row a standing for I[a]; the C slab
    is n1 x |J| x n3. Repeated indices repeat their observations.
    """
    if slab == "R":
        omega, chosen, axis = plan.omega_R, plan.I.as_array(), 0
    elif slab == "C":
        omega, chosen, axis = plan.omega_C, plan.J.as_array(), 1
    else:
        raise ParameterError(f"slab must be 'R' or 'C', got {slab!r}")
    n1, n2, n3 = plan.dims
    shape: Tuple[int, int, int] = (chosen.size, n2, n3) if axis == 0 else (n1, chosen.size, n3)
    pieces = []
    values = []
    for local, index in enumerate(chosen):
        hit = omega.coords[:, axis] == index
        coords = omega.coords[hit].copy()
        coords[:, axis] = local
        pieces.append(coords)
        if omega.has_values:
            values.append(omega.values[hit])
    coords = np.concatenate(pieces) if pieces else np.zeros((0, 3), dtype=np.int64)
    merged = np.concatenate(values) if omega.has_values and values else None
    if omega.has_values and merged is None:
        merged = np.zeros(0)
    return ObservationSet.from_coords(shape, coords, merged)

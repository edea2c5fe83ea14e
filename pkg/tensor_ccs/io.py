# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Tensor, plan and factor files.

Tensor files (T3D1): the ASCII magic ``T3D1``, three little-endian unsigned
64-bit dimensions n1, n2, n3, then n1 n2 n3 little-endian float64 values in
(i, j, k) row-major order.

Plan files are UTF-8 text: ``key=value`` header lines, then an ``[omega_R]``
and an ``[omega_C]`` section of ``i,j,k[,value]`` rows.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from tensor_ccs.exceptions import ParseError, PlanValidationError, TensorIOError
from tensor_ccs.models import Dims
from tensor_ccs.sampling import CcsPlan, ObservationSet
from tensor_ccs.tcur import CurFactors
from tensor_ccs.tensor import DenseTensor3, IndexSet

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAGIC = b"T3D1"
HEADER_BYTES = len(MAGIC) + 3 * 8
PLAN_MAGIC = "# tensor-ccs plan v1"
FACTOR_INDEX = "factors.txt"


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise TensorIOError(f"cannot read {path}: {e.strerror or e}") from e


def _write_bytes(path: PathLike, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise TensorIOError(f"cannot write {path}: {e.strerror or e}") from e


def encode_tensor(t: DenseTensor3) -> bytes:
    """Serialize a tensor to T3D1 bytes."""
    header = np.asarray(t.dims, dtype="<u8").tobytes()
    return MAGIC + header + np.ascontiguousarray(t.values, dtype="<f8").tobytes()


def decode_tensor(data: bytes, path: Optional[str] = None) -> DenseTensor3:
    """Parse T3D1 bytes.

    Raises:
        ParseError: On a bad magic, short header, zero dimension, length
            mismatch or non-finite value, with the byte offset where parsing stopped
    """
    if len(data) < len(MAGIC):
        raise ParseError("file too short for the T3D1 magic", offset=len(data), path=path)
    if data[: len(MAGIC)] != MAGIC:
        raise ParseError(f"bad magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}", offset=0, path=path)
    if len(data) < HEADER_BYTES:
        raise ParseError("truncated header", offset=len(data), path=path)
    dims = tuple(int(n) for n in np.frombuffer(data, dtype="<u8", count=3, offset=len(MAGIC)))
    if min(dims) < 1:
        raise ParseError(f"dimensions must be positive, got {dims}", offset=len(MAGIC), path=path)
    count = dims[0] * dims[1] * dims[2]
    expected = HEADER_BYTES + 8 * count
    if len(data) < expected:
        raise ParseError(
            f"truncated payload: {count} values need {expected} bytes, file has {len(data)}",
            offset=len(data), path=path,
        )
    if len(data) > expected:
        raise ParseError(f"{len(data) - expected} trailing bytes", offset=expected, path=path)
    values = np.frombuffer(data, dtype="<f8", count=count, offset=HEADER_BYTES)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ParseError("non-finite value", offset=HEADER_BYTES + 8 * int(bad[0]), path=path)
    return DenseTensor3(values.astype(np.float64).reshape(dims))


def write_tensor(path: PathLike, t: DenseTensor3) -> None:
    """Write ``t`` as a T3D1 file."""
    _write_bytes(path, encode_tensor(t))
    logger.debug("wrote %s tensor to %s", t.dims, path)


def read_tensor(path: PathLike) -> DenseTensor3:
    """Read a T3D1 file.

    Raises:
        TensorIOError: If the file cannot be read
        ParseError: If the content is malformed
    """
    return decode_tensor(_read_bytes(path), path=str(path))


def _format_indices(indices: Tuple[int, ...]) -> str:
    return ",".join(str(i) for i in indices)


def _format_rows(omega: ObservationSet) -> List[str]:
    if omega.values is None:
        return [f"{i},{j},{k}" for i, j, k in omega.coords.tolist()]
    return [
        f"{i},{j},{k},{value!r}"
        for (i, j, k), value in zip(omega.coords.tolist(), omega.values.tolist())
    ]


def encode_plan(plan: CcsPlan) -> str:
    """Serialize a plan (with or without values) to the plan text format."""
    lines = [
        PLAN_MAGIC,
        "dims=" + _format_indices(plan.dims),
        "I=" + _format_indices(plan.I.indices),
        "J=" + _format_indices(plan.J.indices),
        f"p_R={plan.p_R!r}",
        f"p_C={plan.p_C!r}",
        f"seed={'none' if plan.seed is None else plan.seed}",
        f"mode={'with-replacement' if plan.replacement else 'without-replacement'}",
        f"values={'yes' if plan.has_values else 'no'}",
        "[omega_R]",
        *_format_rows(plan.omega_R),
        "[omega_C]",
        *_format_rows(plan.omega_C),
    ]
    return "\n".join(lines) + "\n"


def write_plan(path: PathLike, plan: CcsPlan) -> None:
    """Write ``plan`` to a plan text file."""
    _write_bytes(path, encode_plan(plan).encode("utf-8"))


class _PlanReader:
    def __init__(self, data: bytes, path: Optional[str]):
        self.path = path
        self.lines: List[Tuple[int, str]] = []
        offset = 0
        for raw in data.split(b"\n"):
            try:
                text = raw.decode("utf-8").rstrip("\r")
            except UnicodeDecodeError as e:
                raise ParseError("invalid UTF-8", offset=offset + e.start, path=path) from e
            self.lines.append((offset, text))
            offset += len(raw) + 1
        self.end = len(data)

    def fail(self, message: str, offset: int) -> ParseError:
        return ParseError(message, offset=offset, path=self.path)


def _parse_ints(text: str, offset: int, reader: _PlanReader) -> Tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as e:
        raise reader.fail(f"expected comma-separated integers, got {text!r}", offset) from e


def _parse_section(
    rows: List[Tuple[int, str]], dims: Dims, with_values: bool, reader: _PlanReader, name: str
) -> ObservationSet:
    width = 4 if with_values else 3
    coords = np.zeros((len(rows), 3), dtype=np.int64)
    values = np.zeros(len(rows)) if with_values else None
    for row, (offset, text) in enumerate(rows):
        parts = text.split(",")
        if len(parts) != width:
            raise reader.fail(f"{name} row needs {width} fields, got {len(parts)}", offset)
        try:
            coords[row] = [int(p) for p in parts[:3]]
            if values is not None:
                values[row] = float(parts[3])
        except ValueError as e:
            raise reader.fail(f"malformed {name} row {text!r}", offset) from e
        if any(not 0 <= c < n for c, n in zip(coords[row], dims)):
            raise reader.fail(f"{name} coordinate {tuple(coords[row])} outside {dims}", offset)
        if values is not None and not np.isfinite(values[row]):
            raise reader.fail(f"non-finite {name} value", offset)
    linear = coords[:, 2] * (dims[0] * dims[1]) + coords[:, 0] * dims[1] + coords[:, 1]
    if np.unique(linear).size != linear.size:
        raise PlanValidationError(f"{name} lists a coordinate twice")
    return ObservationSet.from_coords(dims, coords, values)


def decode_plan(data: bytes, path: Optional[str] = None) -> CcsPlan:
    """Parse the plan text format.

    Raises:
        ParseError: If the text is malformed (with the byte offset of the offending line)
        PlanValidationError: If a section repeats a coordinate or violates the plan invariants
    """
    reader = _PlanReader(data, path)
    lines = [(offset, text) for offset, text in reader.lines if text.strip()]
    if not lines or lines[0][1].strip() != PLAN_MAGIC:
        raise reader.fail(f"missing {PLAN_MAGIC!r} header", 0)

    header: Dict[str, Tuple[int, str]] = {}
    sections: Dict[str, List[Tuple[int, str]]] = {}
    current: Optional[str] = None
    for offset, text in lines[1:]:
        if text.startswith("[") and text.endswith("]"):
            current = text[1:-1]
            if current not in ("omega_R", "omega_C") or current in sections:
                raise reader.fail(f"unexpected section {text!r}", offset)
            sections[current] = []
        elif current is not None:
            sections[current].append((offset, text))
        elif "=" in text:
            key, _, value = text.partition("=")
            header[key.strip()] = (offset, value.strip())
        else:
            raise reader.fail(f"expected key=value, got {text!r}", offset)

    required = ("dims", "I", "J", "p_R", "p_C", "seed", "mode", "values")
    for key in required:
        if key not in header:
            raise reader.fail(f"missing header field {key!r}", reader.end)
    for name in ("omega_R", "omega_C"):
        if name not in sections:
            raise reader.fail(f"missing [{name}] section", reader.end)

    dims_offset, dims_text = header["dims"]
    dims = _parse_ints(dims_text, dims_offset, reader)
    if len(dims) != 3 or min(dims) < 1:
        raise reader.fail(f"dims must be three positive integers, got {dims_text!r}", dims_offset)
    shape: Dims = (dims[0], dims[1], dims[2])
    replacement = header["mode"][1] == "with-replacement"
    if header["mode"][1] not in ("with-replacement", "without-replacement"):
        raise reader.fail(f"unknown mode {header['mode'][1]!r}", header["mode"][0])
    with_values = header["values"][1] == "yes"
    try:
        p_R = float(header["p_R"][1])
        p_C = float(header["p_C"][1])
    except ValueError as e:
        raise reader.fail("malformed probability", header["p_R"][0]) from e
    seed_offset, seed_text = header["seed"]
    seed: Optional[int] = None
    if seed_text != "none":
        seed_values = _parse_ints(seed_text, seed_offset, reader)
        if len(seed_values) != 1:
            raise reader.fail(f"seed must be one integer or 'none', got {seed_text!r}", seed_offset)
        seed = seed_values[0]

    rows = IndexSet.of(_parse_ints(header["I"][1], header["I"][0], reader), shape[0], replacement)
    cols = IndexSet.of(_parse_ints(header["J"][1], header["J"][0], reader), shape[1], replacement)
    omega_R = _parse_section(sections["omega_R"], shape, with_values, reader, "omega_R")
    omega_C = _parse_section(sections["omega_C"], shape, with_values, reader, "omega_C")
    delta = len(rows) / shape[0] if math.isclose(len(rows) / shape[0], len(cols) / shape[1]) else None
    return CcsPlan(
        dims=shape, I=rows, J=cols, omega_R=omega_R, omega_C=omega_C,
        p_R=p_R, p_C=p_C, delta=delta, seed=seed, replacement=replacement,
    )


def read_plan(path: PathLike) -> CcsPlan:
    """Read a plan text file."""
    return decode_plan(_read_bytes(path), path=str(path))


def write_factors(directory: PathLike, factors: CurFactors) -> Path:
    """Write C, U and R as T3D1 files plus a text index of I and J into ``directory``."""
    target = Path(directory)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise TensorIOError(f"cannot create {target}: {e.strerror or e}") from e
    for name in ("C", "U", "R"):
        write_tensor(target / f"{name}.t3d", getattr(factors, name))
    index = "\n".join(
        [
            "dims=" + _format_indices(factors.dims),
            "I=" + _format_indices(factors.I.indices),
            "J=" + _format_indices(factors.J.indices),
            f"replacement={'yes' if factors.I.replacement or factors.J.replacement else 'no'}",
        ]
    )
    _write_bytes(target / FACTOR_INDEX, (index + "\n").encode("utf-8"))
    return target


def read_factors(directory: PathLike) -> CurFactors:
    """Read factors written by :func:`write_factors`."""
    target = Path(directory)
    data = _read_bytes(target / FACTOR_INDEX)
    reader = _PlanReader(data, str(target / FACTOR_INDEX))
    fields = {}
    for offset, text in reader.lines:
        if text.strip():
            key, _, value = text.partition("=")
            fields[key] = (offset, value)
    for key in ("dims", "I", "J", "replacement"):
        if key not in fields:
            raise reader.fail(f"missing factor index field {key!r}", reader.end)
    dims_offset, dims_text = fields["dims"]
    dims = _parse_ints(dims_text, dims_offset, reader)
    if len(dims) != 3 or min(dims) < 1:
        raise reader.fail(f"dims must be three positive integers, got {dims_text!r}", dims_offset)
    replacement = fields["replacement"][1] == "yes"
    return CurFactors(
        C=read_tensor(target / "C.t3d"),
        U=read_tensor(target / "U.t3d"),
        R=read_tensor(target / "R.t3d"),
        I=IndexSet.of(_parse_ints(fields["I"][1], fields["I"][0], reader), dims[0], replacement),
        J=IndexSet.of(_parse_ints(fields["J"][1], fields["J"][0], reader), dims[1], replacement),
    )

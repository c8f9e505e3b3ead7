"""Hidden-state matrix data model, HSMX file format, and synthetic generators.

The HSMX trajectory format (little-endian, no padding, no footer)::

    magic   4 bytes  b"HSMX"
    version u32      1
    dtype   u8       0 = f64, 1 = f32
    kind    u8       0 = Response, 1 = Dataset
    reserved u16     0
    rows    u64
    cols    u64
    payload rows*cols scalars, row-major

Computation always happens in float64; an f32 payload is widened on load.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    InfeasibleSpec,
    NonFiniteValue,
    TruncatedPayload,
    UnsupportedVersion,
)

MAGIC = b"HSMX"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIBBHQQ")
HEADER_SIZE = _HEADER.size  # 28 bytes


class MatrixKind(enum.Enum):
    RESPONSE = 0
    DATASET = 1


@dataclass(frozen=True)
class HiddenStateMatrix:
    """A T-by-D (response) or N-by-D (dataset) matrix of hidden states."""

    data: np.ndarray
    kind: MatrixKind = MatrixKind.RESPONSE

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"matrix must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValue("matrix contains NaN/Inf", offset=-1)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass
class TrajectoryRecord:
    """One rollout: its hidden states plus the reward/advantage sidecar."""

    id: str
    matrix: HiddenStateMatrix
    is_correct: bool
    has_boxed_format: bool
    base_advantage: float | None = None

    def __post_init__(self):
        if self.matrix.kind is not MatrixKind.RESPONSE:
            raise DimensionMismatch("TrajectoryRecord requires a Response-kind matrix")


def write_matrix(matrix: HiddenStateMatrix, path: str | Path, dtype: str = "f64") -> None:
    """Serialize a matrix to the HSMX format. dtype is 'f64' or 'f32'."""
    if dtype not in ("f64", "f32"):
        raise ValueError(f"unsupported dtype {dtype!r}")
    flag = 0 if dtype == "f64" else 1
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, flag, matrix.kind.value, 0, matrix.rows, matrix.cols
    )
    payload = np.ascontiguousarray(
        matrix.data, dtype=np.float64 if flag == 0 else np.float32
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_matrix(path: str | Path) -> HiddenStateMatrix:
    """Load an HSMX file, widening an f32 payload to f64."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise TruncatedPayload("file shorter than HSMX header", offset=len(raw))
    magic, version, dtype_flag, kind_flag, reserved, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {magic!r}", offset=0)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"unsupported HSMX version {version}", offset=4)
    if dtype_flag not in (0, 1):
        raise UnsupportedVersion(f"unknown dtype flag {dtype_flag}", offset=8)
    if kind_flag not in (0, 1):
        raise UnsupportedVersion(f"unknown kind flag {kind_flag}", offset=9)
    itemsize = 8 if dtype_flag == 0 else 4
    expected = rows * cols * itemsize
    got = len(raw) - HEADER_SIZE
    if got < expected:
        raise TruncatedPayload(
            f"payload holds {got // itemsize} scalars, header declares {rows * cols}",
            offset=len(raw),
        )
    np_dtype = np.dtype("<f8") if dtype_flag == 0 else np.dtype("<f4")
    flat = np.frombuffer(raw, dtype=np_dtype, count=rows * cols, offset=HEADER_SIZE)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise NonFiniteValue(
            "non-finite scalar in payload", offset=HEADER_SIZE + int(bad[0]) * itemsize
        )
    data = flat.astype(np.float64).reshape(rows, cols)
    return HiddenStateMatrix(data, MatrixKind(kind_flag))


def mean_pool_response(matrix: HiddenStateMatrix) -> np.ndarray:
    """Average the token hidden states of one response into a single D-vector."""
    if matrix.kind is not MatrixKind.RESPONSE:
        raise DimensionMismatch("mean_pool_response expects a Response-kind matrix")
    return matrix.data.mean(axis=0)


def stack_dataset(responses: list[HiddenStateMatrix]) -> HiddenStateMatrix:
    """Stack per-response mean embeddings into an N-by-D dataset matrix."""
    if not responses:
        raise DimensionMismatch("stack_dataset requires at least one response")
    dims = {m.cols for m in responses}
    if len(dims) != 1:
        raise DimensionMismatch(f"responses disagree on feature dimension: {sorted(dims)}")
    rows = np.stack([mean_pool_response(m) for m in responses])
    return HiddenStateMatrix(rows, MatrixKind.DATASET)


# --- synthetic generators -------------------------------------------------


@dataclass(frozen=True)
class OrthogonalRows:
    """k mutually orthogonal rows in R^D, each with squared norm row_norm."""

    k: int
    dims: int
    row_norm: float = 1.0


@dataclass(frozen=True)
class GaussianIID:
    rows: int
    dims: int
    sigma: float = 1.0


@dataclass(frozen=True)
class LowRank:
    rows: int
    dims: int
    rank: int


GeneratorSpec = OrthogonalRows | GaussianIID | LowRank


def generate_synthetic(spec: GeneratorSpec, seed: int) -> HiddenStateMatrix:
    """Deterministically generate a test matrix from (spec, seed)."""
    rng = np.random.default_rng(seed)
    if isinstance(spec, OrthogonalRows):
        if spec.k > spec.dims:
            raise InfeasibleSpec(f"cannot fit {spec.k} orthogonal rows in R^{spec.dims}")
        if spec.k < 1 or spec.row_norm <= 0:
            raise InfeasibleSpec("OrthogonalRows needs k >= 1 and row_norm > 0")
        base = rng.standard_normal((spec.dims, spec.k))
        q, _ = np.linalg.qr(base)  # orthonormal columns
        data = q.T * np.sqrt(spec.row_norm)
        return HiddenStateMatrix(data)
    if isinstance(spec, GaussianIID):
        if spec.rows < 1 or spec.dims < 1 or spec.sigma <= 0:
            raise InfeasibleSpec("GaussianIID needs rows, dims >= 1 and sigma > 0")
        return HiddenStateMatrix(rng.standard_normal((spec.rows, spec.dims)) * spec.sigma)
    if isinstance(spec, LowRank):
        if spec.rank < 1 or spec.rank > min(spec.rows, spec.dims):
            raise InfeasibleSpec(
                f"rank {spec.rank} infeasible for a {spec.rows}x{spec.dims} matrix"
            )
        left = rng.standard_normal((spec.rows, spec.rank))
        right = rng.standard_normal((spec.rank, spec.dims))
        return HiddenStateMatrix(left @ right)
    raise InfeasibleSpec(f"unknown generator spec {spec!r}")

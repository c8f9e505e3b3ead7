"""Prefix-wise metric series and its first/second-order temporal differences.

For a trajectory of T tokens and stride s, the metric is evaluated on the
growing prefixes at steps {s, 2s, ..., Ks}, K = floor((T-1)/s). The
instantaneous difference compares each value against the running mean of all
earlier values:

    delta_j = m_j - mean(m_1 .. m_{j-1})          (j >= 2)

The velocity is the mean of the deltas (defined iff K >= 2) and the
acceleration is the mean of consecutive delta differences (defined iff
K >= 3). For the exactly linear series m_n = n these reduce to (N+2)/4 and
1/2 respectively.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import SeriesTooShort, TrajectoryTooShort
from .spectral import Centering, effective_rank
from .tensor_io import HiddenStateMatrix, MatrixKind

DEFAULT_STRIDE = 40


class Engine(enum.Enum):
    NAIVE_SVD = "naive"
    INCREMENTAL_GRAM = "incremental"


@dataclass(frozen=True)
class MetricSeries:
    stride: int
    eval_steps: tuple[int, ...]
    prefix_values: np.ndarray
    deltas: np.ndarray  # empty when K < 2
    velocity: float | None  # defined iff K >= 2
    acceleration: float | None  # defined iff K >= 3


def eval_steps(rows: int, stride: int) -> list[int]:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    k = (rows - 1) // stride
    if k < 1:
        raise TrajectoryTooShort(
            f"trajectory of {rows} rows yields no eval step at stride {stride}"
        )
    return [j * stride for j in range(1, k + 1)]


def instantaneous_deltas(values: np.ndarray) -> np.ndarray:
    """delta_j = m_j - running mean of m_1..m_{j-1}, for j = 2..K."""
    values = np.asarray(values, dtype=np.float64)
    k = values.size
    if k < 2:
        return np.empty(0)
    running_means = np.cumsum(values[:-1]) / np.arange(1, k)
    return values[1:] - running_means


def first_order_difference(prefix_values: np.ndarray) -> float:
    """Mean of the instantaneous deltas (the series' velocity)."""
    deltas = instantaneous_deltas(prefix_values)
    if deltas.size < 1:
        raise SeriesTooShort("velocity needs at least 2 prefix values")
    return float(deltas.mean())


def second_order_difference(prefix_values: np.ndarray) -> float:
    """Mean change between consecutive deltas (the series' acceleration)."""
    deltas = instantaneous_deltas(prefix_values)
    if deltas.size < 2:
        raise SeriesTooShort("acceleration needs at least 3 prefix values")
    return float(np.diff(deltas).mean())


def series_from_values(values: np.ndarray, stride: int, steps: list[int]) -> MetricSeries:
    values = np.asarray(values, dtype=np.float64)
    deltas = instantaneous_deltas(values)
    velocity = float(deltas.mean()) if deltas.size >= 1 else None
    acceleration = float(np.diff(deltas).mean()) if deltas.size >= 2 else None
    return MetricSeries(
        stride=stride,
        eval_steps=tuple(steps),
        prefix_values=values,
        deltas=deltas,
        velocity=velocity,
        acceleration=acceleration,
    )


def prefix_metric_series(
    matrix: HiddenStateMatrix,
    stride: int = DEFAULT_STRIDE,
    centering: Centering = Centering.RAW,
    engine: Engine = Engine.NAIVE_SVD,
) -> MetricSeries:
    """Effective rank on every stride-aligned prefix, plus its differences."""
    steps = eval_steps(matrix.rows, stride)
    if engine is Engine.INCREMENTAL_GRAM:
        from .gram_stream import stream_prefix_eranks

        values = stream_prefix_eranks(matrix, stride, centering)
    else:
        values = np.array(
            [
                effective_rank(
                    HiddenStateMatrix(matrix.data[:step], MatrixKind.RESPONSE), centering
                )
                for step in steps
            ]
        )
    return series_from_values(values, stride, steps)


def trajectory_metrics(
    matrix: HiddenStateMatrix,
    stride: int = DEFAULT_STRIDE,
    centering: Centering = Centering.RAW,
    engine: Engine = Engine.NAIVE_SVD,
) -> tuple[float, MetricSeries]:
    """(final full-matrix effective rank, prefix metric series).

    The final metric always uses all T rows, even the tail beyond the last
    stride-aligned step.
    """
    series = prefix_metric_series(matrix, stride, centering, engine)
    return effective_rank(matrix, centering), series

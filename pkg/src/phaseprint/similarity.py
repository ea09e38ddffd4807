"""Distance computation between fingerprints.

Fingerprints are compared as sequences of per-phase vectors (one vector per
phase index, concatenated across counters). Euclidean distance flattens the
sequences after zero-padding the shorter one; dynamic time warping aligns
them with the classic monotone dynamic program. When phase counts differ,
an offset scan locates the shorter sequence inside the longer one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CounterSetMismatchError
from .fingerprint import Fingerprint

METRICS = ("squared", "manhattan")


@dataclass(frozen=True, eq=False)
class PhaseVectorSequence:
    """Ordered per-phase vectors of one fingerprint, shape (q, n*k)."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ValueError(f"need a non-empty 2-D vector sequence, got shape {vectors.shape}")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class DistanceReport:
    """Both distances between two fingerprints plus alignment detail.

    offset is 0 for equal phase counts; for unequal counts it is the offset
    of the shorter sequence inside the longer one, or None when an explicit
    phase threshold ruled every offset out. aligned_pairs is the optimal
    DTW path, monotone in both coordinates.
    """

    ed: float
    dtw: float
    metric: str
    offset: int | None
    aligned_pairs: tuple[tuple[int, int], ...]


def phase_vectors(fp: Fingerprint) -> PhaseVectorSequence:
    """Vector j concatenates tensor[c][j][:] over counters c (padding included)."""
    n, q, k = fp.tensor.shape
    return PhaseVectorSequence(fp.tensor.transpose(1, 0, 2).reshape(q, n * k))


def _check_dimensions(a: PhaseVectorSequence, b: PhaseVectorSequence) -> None:
    if a.dimension != b.dimension:
        raise CounterSetMismatchError(
            f"fingerprints from incompatible counter sets: vector dimensions "
            f"{a.dimension} != {b.dimension}"
        )


def euclidean(a: PhaseVectorSequence, b: PhaseVectorSequence) -> float:
    """Flattened Euclidean distance; the shorter sequence is zero-padded,
    mirroring the fingerprint's own padding semantics."""
    _check_dimensions(a, b)
    q = max(len(a), len(b))
    pa = np.zeros((q, a.dimension))
    pa[: len(a)] = a.vectors
    pb = np.zeros((q, b.dimension))
    pb[: len(b)] = b.vectors
    return float(np.sqrt(((pa - pb) ** 2).sum()))


def _pointwise_costs(a: PhaseVectorSequence, b: PhaseVectorSequence, metric: str) -> np.ndarray:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    diff = a.vectors[:, None, :] - b.vectors[None, :, :]
    if metric == "squared":
        return (diff**2).sum(axis=2)
    return np.abs(diff).sum(axis=2)


def dtw(
    a: PhaseVectorSequence,
    b: PhaseVectorSequence,
    metric: str = "squared",
) -> tuple[float, tuple[tuple[int, int], ...]]:
    """Dynamic time warping cost and optimal path.

    Classic dynamic program over the len(a) x len(b) grid with steps
    (1,0), (0,1), (1,1), anchored at both ends; the cost is the sum of the
    pointwise metric along the optimal path. Traceback prefers the diagonal
    step on ties, so the path is deterministic.
    """
    _check_dimensions(a, b)
    costs = _pointwise_costs(a, b, metric)
    qa, qb = costs.shape

    acc = np.full((qa + 1, qb + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, qa + 1):
        for j in range(1, qb + 1):
            acc[i, j] = costs[i - 1, j - 1] + min(acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])

    path = [(qa - 1, qb - 1)]
    i, j = qa, qb
    while (i, j) != (1, 1):
        candidates = ((acc[i - 1, j - 1], i - 1, j - 1), (acc[i - 1, j], i - 1, j), (acc[i, j - 1], i, j - 1))
        _, i, j = min(candidates, key=lambda item: item[0])
        path.append((i - 1, j - 1))
    path.reverse()
    return float(acc[qa, qb]), tuple(path)


def align_offset(
    short: PhaseVectorSequence,
    long: PhaseVectorSequence,
    phase_threshold: float,
) -> int | None:
    """Smallest offset j such that every pair (short_i, long_{i+j}) is within
    phase_threshold under the Manhattan pointwise distance; None if no offset
    qualifies."""
    _check_dimensions(short, long)
    if len(short) > len(long):
        raise ValueError("first sequence must not be longer than the second")
    costs = _pointwise_costs(short, long, "manhattan")
    m = len(short)
    for j in range(len(long) - m + 1):
        if all(costs[i, i + j] <= phase_threshold for i in range(m)):
            return j
    return None


def _tightest_offset(short: PhaseVectorSequence, long: PhaseVectorSequence) -> int:
    """Offset align_offset would return under the tightest satisfiable
    threshold: minimize the worst per-pair Manhattan distance, smallest j on
    ties."""
    costs = _pointwise_costs(short, long, "manhattan")
    m = len(short)
    worst = [max(costs[i, i + j] for i in range(m)) for j in range(len(long) - m + 1)]
    return int(np.argmin(worst))


def workload_distance(
    a: Fingerprint,
    b: Fingerprint,
    metric: str = "squared",
    phase_threshold: float | None = None,
) -> DistanceReport:
    """Full distance report between two fingerprints over the same counters.

    Both ED and DTW are always computed. With unequal phase counts, the
    offset comes from align_offset: at the explicit phase_threshold when one
    is given (None when no offset qualifies), otherwise at the tightest
    satisfiable threshold so the report is always populated.
    """
    if a.counter_names != b.counter_names:
        raise CounterSetMismatchError(
            f"fingerprints cover different counters: {list(a.counter_names)} vs {list(b.counter_names)}"
        )
    va = phase_vectors(a)
    vb = phase_vectors(b)
    ed = euclidean(va, vb)
    cost, path = dtw(va, vb, metric)

    if len(va) == len(vb):
        offset: int | None = 0
    else:
        short, long = (va, vb) if len(va) < len(vb) else (vb, va)
        if phase_threshold is None:
            offset = _tightest_offset(short, long)
        else:
            offset = align_offset(short, long, phase_threshold)
    return DistanceReport(ed=ed, dtw=cost, metric=metric, offset=offset, aligned_pairs=path)

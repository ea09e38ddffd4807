"""Per-phase statistics and the zero-padded fingerprint tensor.

Each detected phase of each normalized counter is summarized by six numbers:
mean, median, population variance, augmented Dickey-Fuller statistic,
skewness, and excess kurtosis. Per-counter summary matrices are zero-padded
to the maximum phase count q across counters, giving an n x q x 6 tensor
that is the unit of workload comparison.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bocpd import BocpdConfig, PhaseBoundaries, segment
from .errors import SchemaError
from .ingest import TelemetryMatrix, normalize

PHASE_STAT_COUNT = 6

_CONFIG_FIELDS = ("hazard_lambda", "prior_mean", "prior_kappa", "prior_alpha", "prior_beta", "min_phase_len")

FINGERPRINT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PhaseSummary:
    """Six summary statistics plus bookkeeping for one phase of one counter.

    A degenerate ADF fit (segment too short or rank-deficient regression)
    stores adf_stat 0.0 with degenerate_adf True, so consumers can tell a
    genuine zero statistic from an unusable one.
    """

    mean: float
    median: float
    variance: float
    adf_stat: float
    skewness: float
    kurtosis: float
    length: int
    degenerate_adf: bool

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.mean, self.median, self.variance, self.adf_stat, self.skewness, self.kurtosis]
        )


def adf_statistic(segment_values, lags: int = 1) -> tuple[float, bool]:
    """Augmented Dickey-Fuller t-statistic with constant-only regression.

    Fits dy_t = a + g*y_{t-1} + sum_i d_i*dy_{t-i} + e by OLS and returns
    (g_hat / SE(g_hat), False). Returns (0.0, True) when the segment is too
    short, the regressors are rank-deficient (constant segments), or the
    residual degrees of freedom do not support a standard error.
    """
    if lags < 0:
        raise ValueError(f"lags must be nonnegative, got {lags}")
    y = np.asarray(segment_values, dtype=np.float64)
    n = y.size
    if n < lags + 4:
        return 0.0, True

    dy = np.diff(y)
    rows = n - 1 - lags
    cols = [np.ones(rows), y[lags : n - 1]]
    for i in range(1, lags + 1):
        cols.append(dy[lags - i : n - 1 - i])
    design = np.column_stack(cols)
    response = dy[lags:]

    k = design.shape[1]
    dof = rows - k
    if dof < 1:
        return 0.0, True

    coef, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < k:
        return 0.0, True
    residuals = response - design @ coef
    sigma2 = float(residuals @ residuals) / dof
    gram_inv = np.linalg.inv(design.T @ design)
    se = math.sqrt(sigma2 * gram_inv[1, 1]) if sigma2 > 0 else 0.0
    if not (se > 0.0 and math.isfinite(se)):
        return 0.0, True
    stat = float(coef[1] / se)
    if not math.isfinite(stat):
        return 0.0, True
    return stat, False


def summarize_phase(segment_values, adf_lags: int = 1) -> PhaseSummary:
    """Summarize one phase: moments are population moments; the median uses
    the midpoint-of-two rule; skewness and kurtosis (excess) are 0 for
    zero-variance segments."""
    x = np.asarray(segment_values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("phase must contain at least one sample")
    mean = float(x.mean())
    variance = float(x.var())
    if variance == 0.0:
        skewness = 0.0
        kurtosis = 0.0
    else:
        centered = x - mean
        skewness = float((centered**3).mean() / variance**1.5)
        kurtosis = float((centered**4).mean() / variance**2 - 3.0)
    stat, degenerate = adf_statistic(x, lags=adf_lags)
    return PhaseSummary(
        mean=mean,
        median=float(np.median(x)),
        variance=variance,
        adf_stat=stat,
        skewness=skewness,
        kurtosis=kurtosis,
        length=int(x.size),
        degenerate_adf=degenerate,
    )


def config_digest(config: BocpdConfig) -> str:
    """Stable lowercase-hex digest of the config fields in declaration order."""
    payload = "|".join(f"{name}={getattr(config, name)!r}" for name in _CONFIG_FIELDS)
    return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class Fingerprint:
    """n x q x 6 tensor of per-counter, per-phase statistics plus metadata.

    Rows beyond a counter's own phase count are exactly zero; the aligned
    adf_degenerate flags live beside the tensor so padding zeros and
    degenerate ADF zeros stay distinguishable.
    """

    run_id: str
    workload_label: str | None
    counter_names: tuple[str, ...]
    duration: int
    phase_counts: tuple[int, ...]
    tensor: np.ndarray
    boundaries: tuple[PhaseBoundaries, ...]
    adf_degenerate: tuple[tuple[bool, ...], ...]
    config: BocpdConfig
    config_digest: str

    def __post_init__(self) -> None:
        tensor = np.asarray(self.tensor, dtype=np.float64)
        n = len(self.counter_names)
        if len(self.phase_counts) != n or len(self.boundaries) != n or len(self.adf_degenerate) != n:
            raise ValueError("per-counter metadata must match the counter list")
        q = max(self.phase_counts)
        if tensor.shape != (n, q, PHASE_STAT_COUNT):
            raise ValueError(f"tensor must have shape ({n}, {q}, {PHASE_STAT_COUNT}), got {tensor.shape}")
        for c, p in enumerate(self.phase_counts):
            if p < 1 or p != self.boundaries[c].phase_count or p != len(self.adf_degenerate[c]):
                raise ValueError(f"counter {self.counter_names[c]!r}: inconsistent phase count")
            if p < q and np.any(tensor[c, p:, :] != 0.0):
                raise ValueError(f"counter {self.counter_names[c]!r}: padding rows must be zero")
        tensor.setflags(write=False)
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "counter_names", tuple(self.counter_names))
        object.__setattr__(self, "phase_counts", tuple(int(p) for p in self.phase_counts))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        object.__setattr__(self, "adf_degenerate", tuple(tuple(bool(f) for f in row) for row in self.adf_degenerate))

    @property
    def q(self) -> int:
        """Highest phase count across counters; the tensor's middle dimension."""
        return self.tensor.shape[1]


def build_fingerprint(matrix: TelemetryMatrix, config: BocpdConfig) -> Fingerprint:
    """Normalize, segment, and summarize every counter of one run.

    Segmentation errors (series shorter than twice min_phase_len) propagate.
    """
    summaries: list[list[PhaseSummary]] = []
    boundaries: list[PhaseBoundaries] = []
    for counter in matrix.counters:
        normalized = normalize(counter)
        bounds = segment(normalized, config)
        boundaries.append(bounds)
        summaries.append([summarize_phase(normalized.values[a:b]) for a, b in bounds.segments()])

    phase_counts = tuple(len(rows) for rows in summaries)
    q = max(phase_counts)
    tensor = np.zeros((len(matrix.counters), q, PHASE_STAT_COUNT))
    for c, rows in enumerate(summaries):
        for p, summary in enumerate(rows):
            tensor[c, p, :] = summary.as_vector()

    return Fingerprint(
        run_id=matrix.run_id,
        workload_label=matrix.workload_label,
        counter_names=matrix.counter_names,
        duration=matrix.duration,
        phase_counts=phase_counts,
        tensor=tensor,
        boundaries=tuple(boundaries),
        adf_degenerate=tuple(tuple(s.degenerate_adf for s in rows) for rows in summaries),
        config=config,
        config_digest=config_digest(config),
    )


def _round_sig(value: float) -> float:
    return float(f"{value:.9g}")


def fingerprint_to_dict(fp: Fingerprint) -> dict:
    """Serializable document; tensor is row-major with 9 significant digits."""
    return {
        "schema_version": FINGERPRINT_SCHEMA_VERSION,
        "format": "fingerprint",
        "run_id": fp.run_id,
        "workload_label": fp.workload_label,
        "counter_names": list(fp.counter_names),
        "duration": fp.duration,
        "phase_counts": list(fp.phase_counts),
        "q": fp.q,
        "k": PHASE_STAT_COUNT,
        "boundaries": [list(b.change_indices) for b in fp.boundaries],
        "adf_degenerate": [list(flags) for flags in fp.adf_degenerate],
        "tensor": [_round_sig(v) for v in fp.tensor.reshape(-1)],
        "config": {name: getattr(fp.config, name) for name in _CONFIG_FIELDS},
        "config_digest": fp.config_digest,
    }


def fingerprint_from_dict(doc: dict) -> Fingerprint:
    try:
        if doc["format"] != "fingerprint" or doc["schema_version"] != FINGERPRINT_SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported fingerprint document: format={doc.get('format')!r} "
                f"schema_version={doc.get('schema_version')!r}"
            )
        config = BocpdConfig(**doc["config"])
        n = len(doc["counter_names"])
        q = int(doc["q"])
        k = int(doc["k"])
        if k != PHASE_STAT_COUNT:
            raise SchemaError(f"fingerprint k must be {PHASE_STAT_COUNT}, got {k}")
        tensor = np.array(doc["tensor"], dtype=np.float64).reshape(n, q, k)
        duration = int(doc["duration"])
        boundaries = tuple(
            PhaseBoundaries(change_indices=tuple(ix), series_length=duration) for ix in doc["boundaries"]
        )
        return Fingerprint(
            run_id=doc["run_id"],
            workload_label=doc["workload_label"],
            counter_names=tuple(doc["counter_names"]),
            duration=duration,
            phase_counts=tuple(int(p) for p in doc["phase_counts"]),
            tensor=tensor,
            boundaries=boundaries,
            adf_degenerate=tuple(tuple(bool(f) for f in row) for row in doc["adf_degenerate"]),
            config=config,
            config_digest=doc["config_digest"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed fingerprint document: {exc}") from exc


def save_fingerprint(fp: Fingerprint, path: str | Path) -> None:
    Path(path).write_text(json.dumps(fingerprint_to_dict(fp), indent=2) + "\n", encoding="utf-8")


def load_fingerprint(path: str | Path) -> Fingerprint:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: fingerprint document must be a JSON object")
    return fingerprint_from_dict(doc)

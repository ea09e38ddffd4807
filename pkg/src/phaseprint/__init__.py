"""Workload fingerprinting and detection from performance-counter telemetry.

Pipeline: parse or simulate telemetry, detect per-counter phases with
Bayesian online change-point detection, summarize phases into an n x q x 6
fingerprint tensor, then compare fingerprints (Euclidean / dynamic time
warping) against per-workload thresholds to recognize known workloads and
flag unknown ones.
"""

from __future__ import annotations

from .bocpd import (
    BocpdConfig,
    BocpdState,
    PhaseBoundaries,
    RunLengthPosterior,
    initial_state,
    run_length_posterior,
    segment,
    step,
)
from .classifier import (
    UNKNOWN,
    ClassificationResult,
    ClassStats,
    EvaluationMetrics,
    ThresholdModel,
    classify,
    evaluate,
    fit,
    load_model,
    save_model,
    split_dataset,
)
from .errors import (
    CounterSetMismatchError,
    CsvFormatError,
    DatasetError,
    PhaseprintError,
    SchemaError,
    SeriesTooShortError,
)
from .fingerprint import (
    PHASE_STAT_COUNT,
    Fingerprint,
    PhaseSummary,
    adf_statistic,
    build_fingerprint,
    config_digest,
    load_fingerprint,
    save_fingerprint,
    summarize_phase,
)
from .ingest import (
    CounterKind,
    CounterSeries,
    NormalizedSeries,
    TelemetryMatrix,
    normalize,
    parse_csv,
    write_csv,
)
from .similarity import (
    METRICS,
    DistanceReport,
    PhaseVectorSequence,
    align_offset,
    dtw,
    euclidean,
    phase_vectors,
    workload_distance,
)
from .simulator import (
    PhaseSpec,
    RunJitter,
    WorkloadSpec,
    default_suite,
    generate_run,
    generate_suite,
    load_suite,
    outlier_family,
    save_suite,
)

__version__ = "0.1.0"

__all__ = [
    "BocpdConfig",
    "BocpdState",
    "ClassificationResult",
    "ClassStats",
    "CounterKind",
    "CounterSeries",
    "CounterSetMismatchError",
    "CsvFormatError",
    "DatasetError",
    "DistanceReport",
    "EvaluationMetrics",
    "Fingerprint",
    "METRICS",
    "NormalizedSeries",
    "PHASE_STAT_COUNT",
    "PhaseBoundaries",
    "PhaseSpec",
    "PhaseSummary",
    "PhaseVectorSequence",
    "PhaseprintError",
    "RunJitter",
    "RunLengthPosterior",
    "SchemaError",
    "SeriesTooShortError",
    "TelemetryMatrix",
    "ThresholdModel",
    "UNKNOWN",
    "WorkloadSpec",
    "adf_statistic",
    "align_offset",
    "build_fingerprint",
    "classify",
    "config_digest",
    "default_suite",
    "dtw",
    "euclidean",
    "evaluate",
    "fit",
    "generate_run",
    "generate_suite",
    "initial_state",
    "load_fingerprint",
    "load_model",
    "load_suite",
    "normalize",
    "outlier_family",
    "parse_csv",
    "phase_vectors",
    "run_length_posterior",
    "save_fingerprint",
    "save_model",
    "save_suite",
    "segment",
    "split_dataset",
    "step",
    "summarize_phase",
    "workload_distance",
    "write_csv",
]

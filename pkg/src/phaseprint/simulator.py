"""Deterministic piecewise-stationary telemetry generator.

Stands in for live counter collection: each workload family is a sequence of
phases, each phase emitting Gaussian samples per counter. All randomness
comes from a numpy PCG64 generator seeded with the SHA-256 of
``"<family_name>\\x00<seed>"``, so a (spec, seed) pair reproduces the same
matrix bit for bit on any platform and different families never share a
stream.

The shipped default suite is six synthetic families loosely shaped like
common cloud services (key-value store, OLTP database, web serving, ML
inference, stream ingestion, batch analytics). Counter names follow the
usual PMU/OS vocabulary; all magnitudes are invented.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .ingest import CounterSeries, TelemetryMatrix

SUITE_SCHEMA_VERSION = 1

DEFAULT_COUNTERS = (
    "load_instructions",
    "llc_misses",
    "l1_misses",
    "itlb_misses",
    "l2_misses",
    "cpu_utilization",
    "page_major_faults",
    "total_page_cache",
)


@dataclass(frozen=True)
class RunJitter:
    """Run-to-run variation: each phase duration moves by up to duration_pct
    and each counter's mean level scales by one per-run factor of up to
    mean_pct (uniform, relative). Scaling is per counter, not per phase, so
    counters that are flat by design stay exactly flat within a run."""

    duration_pct: float = 0.0
    mean_pct: float = 0.0

    def __post_init__(self) -> None:
        for name in ("duration_pct", "mean_pct"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {value}")


@dataclass(frozen=True)
class PhaseSpec:
    """One phase: duration in samples plus per-counter mean and std."""

    duration: int
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.duration < 1:
            raise ValueError(f"phase duration must be >= 1, got {self.duration}")
        if len(self.means) != len(self.stds):
            raise ValueError("means and stds must have the same length")
        if any(s < 0 for s in self.stds):
            raise ValueError("stds must be nonnegative")
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "stds", tuple(float(s) for s in self.stds))


@dataclass(frozen=True)
class WorkloadSpec:
    """A synthetic workload family: named counters and an ordered phase plan."""

    family_name: str
    counters: tuple[str, ...]
    phases: tuple[PhaseSpec, ...]
    run_jitter: RunJitter = field(default_factory=RunJitter)

    def __post_init__(self) -> None:
        if not self.family_name:
            raise ValueError("family_name must be non-empty")
        counters = tuple(self.counters)
        if not counters or len(set(counters)) != len(counters):
            raise ValueError("counters must be non-empty and unique")
        phases = tuple(self.phases)
        if not phases:
            raise ValueError("need at least one phase")
        for phase in phases:
            if len(phase.means) != len(counters):
                raise ValueError("every phase must cover every counter")
        object.__setattr__(self, "counters", counters)
        object.__setattr__(self, "phases", phases)


def _rng_for(spec: WorkloadSpec, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{spec.family_name}\x00{seed}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "big"))


def generate_run(spec: WorkloadSpec, seed: int) -> TelemetryMatrix:
    """Generate one labeled run. Same (spec, seed) gives bitwise-identical
    output; the draw order is fixed: per-phase duration jitters, then
    per-counter scale factors, then the Gaussian samples phase by phase."""
    rng = _rng_for(spec, seed)
    n = len(spec.counters)
    jitter = spec.run_jitter
    durations = []
    for phase in spec.phases:
        duration = phase.duration
        if jitter.duration_pct > 0.0:
            duration = max(1, round(duration * (1.0 + rng.uniform(-jitter.duration_pct, jitter.duration_pct))))
        durations.append(duration)
    if jitter.mean_pct > 0.0:
        scale = 1.0 + rng.uniform(-jitter.mean_pct, jitter.mean_pct, size=n)
    else:
        scale = np.ones(n)
    blocks = [
        rng.normal(loc=np.array(phase.means) * scale, scale=np.array(phase.stds), size=(duration, n))
        for phase, duration in zip(spec.phases, durations)
    ]
    data = np.vstack(blocks)
    counters = tuple(
        CounterSeries(name=name, samples=data[:, i]) for i, name in enumerate(spec.counters)
    )
    return TelemetryMatrix(
        run_id=f"{spec.family_name}-s{seed:05d}",
        counters=counters,
        workload_label=spec.family_name,
    )


def generate_suite(
    specs: list[WorkloadSpec] | tuple[WorkloadSpec, ...],
    runs_per_family: int,
    base_seed: int,
) -> list[TelemetryMatrix]:
    """runs_per_family labeled runs per family, seeded base_seed + run index."""
    if runs_per_family < 2:
        raise ValueError(f"runs_per_family must be >= 2, got {runs_per_family}")
    return [generate_run(spec, base_seed + i) for spec in specs for i in range(runs_per_family)]


def _family(
    name: str,
    durations: tuple[int, ...],
    levels: dict[str, tuple[float, ...]],
    noise: dict[str, float],
    jitter: RunJitter,
) -> WorkloadSpec:
    phases = tuple(
        PhaseSpec(
            duration=durations[p],
            means=tuple(levels[c][p] for c in DEFAULT_COUNTERS),
            stds=tuple(noise[c] for c in DEFAULT_COUNTERS),
        )
        for p in range(len(durations))
    )
    return WorkloadSpec(family_name=name, counters=DEFAULT_COUNTERS, phases=phases, run_jitter=jitter)


def default_suite() -> tuple[WorkloadSpec, ...]:
    """Six synthetic families with 2 to 5 phases and distinct shapes.

    After absolute-deviation normalization a run's phase levels fold to
    |level - run mean| / run std, so levels here are laid out to keep every
    intended transition at least ~0.6 of the run's own standard deviation
    wide under jitter (the detector's working prior implies a detection
    floor of roughly 0.4). Each family carries two counters that step
    through every phase; the rest change at a subset of the boundaries so
    per-counter phase counts differ.
    """
    jitter = RunJitter(duration_pct=0.04, mean_pct=0.05)
    kv_store = _family(
        "kv_store",
        (60, 120, 60),
        {
            "load_instructions": (800, 1700, 2600),
            "llc_misses": (430, 270, 110),
            "l1_misses": (300, 950, 950),
            "itlb_misses": (160, 60, 60),
            "l2_misses": (640, 640, 250),
            "cpu_utilization": (30, 60, 90),
            "page_major_faults": (2, 2, 9),
            "total_page_cache": (500, 1500, 1500),
        },
        {
            "load_instructions": 45,
            "llc_misses": 9,
            "l1_misses": 16,
            "itlb_misses": 3,
            "l2_misses": 10,
            "cpu_utilization": 1.5,
            "page_major_faults": 0.2,
            "total_page_cache": 25,
        },
        jitter,
    )
    sql_oltp = _family(
        "sql_oltp",
        (38, 150, 52),
        {
            "load_instructions": (900, 2200, 2200),
            "llc_misses": (320, 320, 90),
            "l1_misses": (1840, 1140, 440),
            "itlb_misses": (260, 90, 90),
            "l2_misses": (130, 460, 790),
            "cpu_utilization": (22, 58, 94),
            "page_major_faults": (2, 2, 11),
            "total_page_cache": (1200, 2400, 2400),
        },
        {
            "load_instructions": 40,
            "llc_misses": 7,
            "l1_misses": 30,
            "itlb_misses": 5,
            "l2_misses": 14,
            "cpu_utilization": 1.5,
            "page_major_faults": 0.25,
            "total_page_cache": 35,
        },
        jitter,
    )
    web_serving = _family(
        "web_serving",
        (45, 195),
        {
            "load_instructions": (600, 1700),
            "llc_misses": (90, 260),
            "l1_misses": (800, 350),
            "itlb_misses": (160, 60),
            "l2_misses": (130, 380),
            "cpu_utilization": (25, 72),
            "page_major_faults": (6, 1),
            "total_page_cache": (900, 1600),
        },
        {
            "load_instructions": 30,
            "llc_misses": 5,
            "l1_misses": 12,
            "itlb_misses": 3,
            "l2_misses": 7,
            "cpu_utilization": 1.3,
            "page_major_faults": 0.15,
            "total_page_cache": 20,
        },
        jitter,
    )
    ml_inference = _family(
        "ml_inference",
        (83, 157),
        {
            "load_instructions": (3200, 900),
            "llc_misses": (300, 700),
            "l1_misses": (1500, 400),
            "itlb_misses": (25, 120),
            "l2_misses": (700, 220),
            "cpu_utilization": (96, 35),
            "page_major_faults": (1, 6),
            "total_page_cache": (3000, 1200),
        },
        {
            "load_instructions": 60,
            "llc_misses": 11,
            "l1_misses": 30,
            "itlb_misses": 2.5,
            "l2_misses": 13,
            "cpu_utilization": 1.6,
            "page_major_faults": 0.15,
            "total_page_cache": 50,
        },
        jitter,
    )
    stream_ingest = _family(
        "stream_ingest",
        (98, 67, 45, 30),
        {
            "load_instructions": (700, 1500, 2240, 2990),
            "llc_misses": (140, 140, 420, 420),
            "l1_misses": (420, 420, 420, 1400),
            "itlb_misses": (130, 130, 45, 45),
            "l2_misses": (560, 560, 560, 180),
            "cpu_utilization": (16, 40, 62, 85),
            "page_major_faults": (1, 1, 6, 6),
            "total_page_cache": (600, 1500, 1500, 2700),
        },
        {
            "load_instructions": 35,
            "llc_misses": 8,
            "l1_misses": 20,
            "itlb_misses": 2.5,
            "l2_misses": 11,
            "cpu_utilization": 1.1,
            "page_major_faults": 0.15,
            "total_page_cache": 30,
        },
        jitter,
    )
    batch_analytics = _family(
        "batch_analytics",
        (42, 54, 48, 51, 45),
        {
            "load_instructions": (1050, 1710, 2520, 3250, 3910),
            "llc_misses": (60, 200, 200, 200, 420),
            "l1_misses": (500, 500, 500, 500, 1700),
            "itlb_misses": (150, 40, 40, 40, 40),
            "l2_misses": (110, 420, 420, 420, 420),
            "cpu_utilization": (16, 34, 56, 75, 93),
            "page_major_faults": (8, 1, 1, 1, 1),
            "total_page_cache": (900, 900, 900, 900, 2400),
        },
        {
            "load_instructions": 45,
            "llc_misses": 5,
            "l1_misses": 25,
            "itlb_misses": 3,
            "l2_misses": 9,
            "cpu_utilization": 1.2,
            "page_major_faults": 0.2,
            "total_page_cache": 30,
        },
        jitter,
    )
    return (kv_store, sql_oltp, web_serving, ml_inference, stream_ingest, batch_analytics)


def outlier_family() -> WorkloadSpec:
    """A deliberately out-of-envelope family for unknown-detection exercises:
    single-phase, heavy noise, level ratios unlike anything in the default
    suite."""
    return _family(
        "burst_outlier",
        (240,),
        {
            "load_instructions": (50,),
            "llc_misses": (900,),
            "l1_misses": (60,),
            "itlb_misses": (400,),
            "l2_misses": (30,),
            "cpu_utilization": (5,),
            "page_major_faults": (40,),
            "total_page_cache": (100,),
        },
        {
            "load_instructions": 20,
            "llc_misses": 200,
            "l1_misses": 25,
            "itlb_misses": 90,
            "l2_misses": 12,
            "cpu_utilization": 2.0,
            "page_major_faults": 15,
            "total_page_cache": 40,
        },
        RunJitter(duration_pct=0.15, mean_pct=0.20),
    )


def suite_to_dict(specs: list[WorkloadSpec] | tuple[WorkloadSpec, ...]) -> dict:
    return {
        "schema_version": SUITE_SCHEMA_VERSION,
        "format": "workload_suite",
        "note": "synthetic workload families; magnitudes are invented",
        "families": [
            {
                "family_name": spec.family_name,
                "counters": list(spec.counters),
                "phases": [
                    {"duration": p.duration, "means": list(p.means), "stds": list(p.stds)}
                    for p in spec.phases
                ],
                "run_jitter": {
                    "duration_pct": spec.run_jitter.duration_pct,
                    "mean_pct": spec.run_jitter.mean_pct,
                },
            }
            for spec in specs
        ],
    }


def suite_from_dict(doc: dict) -> tuple[WorkloadSpec, ...]:
    try:
        if doc["format"] != "workload_suite" or doc["schema_version"] != SUITE_SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported suite document: format={doc.get('format')!r} "
                f"schema_version={doc.get('schema_version')!r}"
            )
        specs = []
        for entry in doc["families"]:
            specs.append(
                WorkloadSpec(
                    family_name=entry["family_name"],
                    counters=tuple(entry["counters"]),
                    phases=tuple(
                        PhaseSpec(
                            duration=int(p["duration"]),
                            means=tuple(p["means"]),
                            stds=tuple(p["stds"]),
                        )
                        for p in entry["phases"]
                    ),
                    run_jitter=RunJitter(
                        duration_pct=float(entry["run_jitter"]["duration_pct"]),
                        mean_pct=float(entry["run_jitter"]["mean_pct"]),
                    ),
                )
            )
        return tuple(specs)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed suite document: {exc}") from exc


def save_suite(specs: list[WorkloadSpec] | tuple[WorkloadSpec, ...], path: str | Path) -> None:
    Path(path).write_text(json.dumps(suite_to_dict(specs), indent=2) + "\n", encoding="utf-8")


def load_suite(path: str | Path) -> tuple[WorkloadSpec, ...]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: suite document must be a JSON object")
    return suite_from_dict(doc)

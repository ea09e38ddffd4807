"""Telemetry CSV parsing and per-counter normalization.

The wire format is a UTF-8 CSV whose first column is ``timestamp`` (seconds,
strictly increasing) followed by one column per counter. Counter readings are
normalized to absolute deviations from the series mean in units of the
population standard deviation, which makes counters of wildly different
magnitudes comparable downstream.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .errors import CsvFormatError


class CounterKind(enum.Enum):
    HARDWARE = "hardware"
    SOFTWARE = "software"


@dataclass(frozen=True, eq=False)
class CounterSeries:
    """One counter's readings, one value per sampling interval."""

    name: str
    samples: np.ndarray
    kind: CounterKind = CounterKind.HARDWARE

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError(f"counter {self.name!r}: samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError(f"counter {self.name!r}: samples must all be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True, eq=False)
class TelemetryMatrix:
    """n counter series of equal length t for one workload run."""

    run_id: str
    counters: tuple[CounterSeries, ...]
    workload_label: str | None = None

    def __post_init__(self) -> None:
        counters = tuple(self.counters)
        if not counters:
            raise ValueError("telemetry matrix needs at least one counter")
        lengths = {len(c) for c in counters}
        if len(lengths) != 1:
            raise ValueError(f"counters differ in length: {sorted(lengths)}")
        if lengths.pop() < 2:
            raise ValueError("need at least 2 samples per counter")
        names = [c.name for c in counters]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate counter names: {dupes}")
        object.__setattr__(self, "counters", counters)

    @property
    def duration(self) -> int:
        """Sample count t, shared by every counter."""
        return len(self.counters[0])

    @property
    def counter_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.counters)


@dataclass(frozen=True, eq=False)
class NormalizedSeries:
    """Absolute-deviation-over-sigma view of one counter series.

    ``normalize`` only ever produces nonnegative values; the container itself
    does not re-check that, so segmentation tests can wrap raw-valued series.
    """

    name: str
    values: np.ndarray
    source_mean: float
    source_std: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"series {self.name!r}: values must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"series {self.name!r}: values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


def normalize(series: CounterSeries) -> NormalizedSeries:
    """Map each reading x to |x - mean| / std (population std).

    A constant series (std 0) normalizes to all zeros instead of raising:
    dead counters are common and must not abort the pipeline.
    """
    x = series.samples
    mean = float(x.mean())
    std = float(x.std())
    if std == 0.0:
        values = np.zeros_like(x)
    else:
        values = np.abs(x - mean) / std
    return NormalizedSeries(name=series.name, values=values, source_mean=mean, source_std=std)


def parse_csv(
    raw: bytes | BinaryIO,
    *,
    run_id: str = "",
    workload_label: str | None = None,
) -> TelemetryMatrix:
    """Parse a telemetry CSV byte stream into a TelemetryMatrix.

    The header must be ``timestamp`` followed by unique counter names; every
    later row must be numeric with the same field count. Timestamps are
    validated (strictly increasing) and then discarded: the pipeline is
    index-based. Counter kind is not part of the wire format and defaults to
    hardware. Row numbers in errors are 1-based file rows (header = row 1).
    """
    if isinstance(raw, (bytes, bytearray)):
        text = bytes(raw).decode("utf-8-sig")
    else:
        text = raw.read().decode("utf-8-sig")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CsvFormatError("empty file: no header row")

    header = rows[0]
    if not header or header[0] != "timestamp":
        raise CsvFormatError("row 1: first header column must be 'timestamp'")
    names = header[1:]
    if not names:
        raise CsvFormatError("row 1: no counter columns after 'timestamp'")
    for idx, name in enumerate(names, start=2):
        if not name:
            raise CsvFormatError(f"row 1, column {idx}: empty counter name")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise CsvFormatError(f"row 1: duplicate counter names: {dupes}")

    data_rows = rows[1:]
    if len(data_rows) < 2:
        raise CsvFormatError(f"need at least 2 data rows, found {len(data_rows)}")

    width = len(header)
    timestamps = np.empty(len(data_rows))
    values = np.empty((len(data_rows), len(names)))
    for i, row in enumerate(data_rows):
        row_num = i + 2
        if len(row) != width:
            raise CsvFormatError(f"row {row_num}: expected {width} fields, found {len(row)}")
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                col = "timestamp" if j == 0 else names[j - 1]
                raise CsvFormatError(
                    f"row {row_num}, column {col!r}: non-numeric value {cell!r}"
                ) from None
            if not np.isfinite(value):
                col = "timestamp" if j == 0 else names[j - 1]
                raise CsvFormatError(f"row {row_num}, column {col!r}: non-finite value {cell!r}")
            if j == 0:
                timestamps[i] = value
            else:
                values[i, j - 1] = value

    increments = np.diff(timestamps)
    if np.any(increments <= 0):
        bad = int(np.argmax(increments <= 0)) + 3  # first offending data row
        raise CsvFormatError(f"row {bad}: timestamps must be strictly increasing")

    counters = tuple(CounterSeries(name=name, samples=values[:, j]) for j, name in enumerate(names))
    return TelemetryMatrix(run_id=run_id, counters=counters, workload_label=workload_label)


def write_csv(matrix: TelemetryMatrix) -> str:
    """Render a TelemetryMatrix as a telemetry CSV document.

    Timestamps are the sample indices in seconds; values carry 6 significant
    digits. ``parse_csv(write_csv(m))`` reproduces the counter data exactly
    for values representable at that precision.
    """
    lines = ["timestamp," + ",".join(matrix.counter_names)]
    columns = [c.samples for c in matrix.counters]
    for i in range(matrix.duration):
        cells = [f"{float(i):.6g}"] + [f"{col[i]:.6g}" for col in columns]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"

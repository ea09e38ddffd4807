"""Shared exception types."""

from __future__ import annotations


class PhaseprintError(Exception):
    """Base class for all domain errors raised by this package."""


class CsvFormatError(PhaseprintError):
    """Telemetry CSV is malformed; the message names the offending row/column."""


class SeriesTooShortError(PhaseprintError):
    """Series is shorter than the segmenter's minimum usable length."""


class CounterSetMismatchError(PhaseprintError):
    """Fingerprints describe different counter universes and cannot be compared."""


class DatasetError(PhaseprintError):
    """Labeled dataset violates a training precondition."""


class SchemaError(PhaseprintError):
    """Persisted artifact does not match its documented schema."""

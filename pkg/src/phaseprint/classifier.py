"""Threshold-based nearest-fingerprint workload classification.

Training computes all intra-class pairwise distances and keeps their mean
and population standard deviation per class; a query is attributed to the
class of its nearest training fingerprint and accepted only when that
distance is at most mean + std of the class. Queries that clear no class
threshold come back as UNKNOWN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CounterSetMismatchError, DatasetError, SchemaError
from .fingerprint import Fingerprint, fingerprint_from_dict, fingerprint_to_dict
from .similarity import METRICS, workload_distance

UNKNOWN = "UNKNOWN"

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ClassStats:
    """Intra-class pairwise distance statistics plus the training runs."""

    dtw_mean: float
    dtw_std: float
    ed_mean: float
    ed_std: float
    fingerprints: tuple[Fingerprint, ...]


@dataclass(eq=False)
class ThresholdModel:
    """Per-workload acceptance bands and embedded training fingerprints.

    metric is the DTW pointwise metric used for both threshold fitting and
    classification; ED statistics are kept alongside for reporting.
    phase_count_index groups training fingerprints by phase count q and is
    rebuilt from per_class, never serialized.
    """

    metric: str
    split_seed: int
    split_ratio: float
    per_class: dict[str, ClassStats]
    phase_count_index: dict[int, tuple[tuple[str, Fingerprint], ...]] = field(init=False)

    def __post_init__(self) -> None:
        index: dict[int, list[tuple[str, Fingerprint]]] = {}
        for label in sorted(self.per_class):
            for fp in self.per_class[label].fingerprints:
                index.setdefault(fp.q, []).append((label, fp))
        self.phase_count_index = {q: tuple(entries) for q, entries in sorted(index.items())}

    @property
    def counter_names(self) -> tuple[str, ...]:
        first_label = next(iter(sorted(self.per_class)))
        return self.per_class[first_label].fingerprints[0].counter_names


@dataclass(frozen=True)
class ClassificationResult:
    """predicted is a workload label or UNKNOWN. best_distance is always the
    nearest training distance. When accepted, runner_up is the nearest
    fingerprint of a different label (None for single-class models); when
    rejected, it repeats the nearest label so callers still see the best
    attribution."""

    predicted: str
    best_distance: float
    accepted: bool
    runner_up: tuple[str, float] | None


@dataclass(frozen=True)
class EvaluationMetrics:
    """Macro-averaged metrics over the labels present in the validation set.

    confusion maps true label -> predicted label (UNKNOWN included) -> count.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: dict[str, dict[str, int]]
    n_items: int


def _require_labeled(fingerprints: list[Fingerprint] | tuple[Fingerprint, ...]) -> dict[str, list[Fingerprint]]:
    groups: dict[str, list[Fingerprint]] = {}
    for fp in fingerprints:
        if not fp.workload_label:
            raise DatasetError(f"fingerprint {fp.run_id!r} has no workload label")
        if fp.workload_label == UNKNOWN:
            raise DatasetError(f"label {UNKNOWN!r} is reserved for rejected queries")
        groups.setdefault(fp.workload_label, []).append(fp)
    if not groups:
        raise DatasetError("no fingerprints given")
    return groups


def split_dataset(
    fingerprints: list[Fingerprint],
    ratio: float,
    seed: int,
) -> tuple[list[Fingerprint], list[Fingerprint]]:
    """Stratified per-label split with deterministic seeded shuffling.

    Per label, the training share is round(ratio * count) (half rounds up),
    clamped so both sides keep at least one run. Labels with fewer than two
    fingerprints are an error.
    """
    if not 0.0 < ratio < 1.0:
        raise DatasetError(f"split ratio must be in (0, 1), got {ratio}")
    groups = _require_labeled(fingerprints)
    rng = np.random.default_rng(seed)
    train: list[Fingerprint] = []
    validation: list[Fingerprint] = []
    for label in sorted(groups):
        items = groups[label]
        count = len(items)
        if count < 2:
            raise DatasetError(f"label {label!r} has {count} fingerprint; need at least 2 to split")
        order = rng.permutation(count)
        n_train = min(max(int(np.floor(ratio * count + 0.5)), 1), count - 1)
        train.extend(items[i] for i in order[:n_train])
        validation.extend(items[i] for i in order[n_train:])
    return train, validation


def fit(
    train: list[Fingerprint],
    metric: str = "squared",
    *,
    split_seed: int = 0,
    split_ratio: float = 0.7,
) -> ThresholdModel:
    """Fit per-class thresholds from all intra-class pairwise distances.

    Means and standard deviations are population statistics over the
    unordered pairs. Every class needs at least two training runs, and all
    runs must share one counter universe. split_seed/split_ratio are
    recorded for provenance only.
    """
    if metric not in METRICS:
        raise DatasetError(f"metric must be one of {METRICS}, got {metric!r}")
    groups = _require_labeled(train)
    universe = train[0].counter_names
    for fp in train:
        if fp.counter_names != universe:
            raise CounterSetMismatchError(
                f"training fingerprint {fp.run_id!r} covers different counters"
            )

    per_class: dict[str, ClassStats] = {}
    for label in sorted(groups):
        items = groups[label]
        if len(items) < 2:
            raise DatasetError(f"label {label!r} has 1 training fingerprint; need at least 2")
        dtw_values = []
        ed_values = []
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                report = workload_distance(items[i], items[j], metric)
                dtw_values.append(report.dtw)
                ed_values.append(report.ed)
        per_class[label] = ClassStats(
            dtw_mean=float(np.mean(dtw_values)),
            dtw_std=float(np.std(dtw_values)),
            ed_mean=float(np.mean(ed_values)),
            ed_std=float(np.std(ed_values)),
            fingerprints=tuple(items),
        )
    return ThresholdModel(metric=metric, split_seed=split_seed, split_ratio=split_ratio, per_class=per_class)


def classify(model: ThresholdModel, query: Fingerprint) -> ClassificationResult:
    """Nearest-fingerprint classification with per-class acceptance bands.

    Candidates are the training fingerprints whose phase count equals the
    query's; when none match, all training fingerprints are considered,
    nearest phase count first. The winner is the minimum DTW distance under
    the model metric, ties broken by smaller phase-count difference, then
    lexicographic label, then run id. The match is accepted iff the distance
    is at most the winning class's mean + std (distances below the band are
    better-than-typical matches, never rejected).
    """
    if query.counter_names != model.counter_names:
        raise CounterSetMismatchError(
            f"query covers different counters: {list(query.counter_names)} "
            f"vs {list(model.counter_names)}"
        )
    candidates = model.phase_count_index.get(query.q)
    if not candidates:
        candidates = tuple(entry for q in model.phase_count_index for entry in model.phase_count_index[q])

    scored = []
    for label, fp in candidates:
        report = workload_distance(fp, query, model.metric)
        scored.append((report.dtw, abs(fp.q - query.q), label, fp.run_id))
    scored.sort()
    best_distance, _, best_label, _ = scored[0]

    stats = model.per_class[best_label]
    accepted = best_distance <= stats.dtw_mean + stats.dtw_std

    runner_up: tuple[str, float] | None = None
    if accepted:
        for distance, _, label, _ in scored[1:]:
            if label != best_label:
                runner_up = (label, float(distance))
                break
        predicted = best_label
    else:
        predicted = UNKNOWN
        runner_up = (best_label, float(best_distance))
    return ClassificationResult(
        predicted=predicted,
        best_distance=float(best_distance),
        accepted=accepted,
        runner_up=runner_up,
    )


def evaluate(model: ThresholdModel, validation: list[Fingerprint]) -> EvaluationMetrics:
    """Classify every validation fingerprint and score against its label.

    UNKNOWN counts as a wrong prediction for a labeled item. Precision,
    recall, and F1 are macro-averaged over the labels present in the
    validation set; 0/0 ratios count as 0.
    """
    groups = _require_labeled(validation)
    confusion: dict[str, dict[str, int]] = {label: {} for label in sorted(groups)}
    correct = 0
    total = 0
    for label in sorted(groups):
        for fp in groups[label]:
            result = classify(model, fp)
            row = confusion[label]
            row[result.predicted] = row.get(result.predicted, 0) + 1
            correct += int(result.predicted == label)
            total += 1

    precisions = []
    recalls = []
    f1s = []
    for label in sorted(groups):
        tp = confusion[label].get(label, 0)
        predicted_as = sum(row.get(label, 0) for row in confusion.values())
        actual = sum(confusion[label].values())
        precision = tp / predicted_as if predicted_as else 0.0
        recall = tp / actual if actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    return EvaluationMetrics(
        accuracy=correct / total,
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=float(np.mean(f1s)),
        confusion=confusion,
        n_items=total,
    )


def model_to_dict(model: ThresholdModel) -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "format": "threshold_model",
        "metric": model.metric,
        "split_seed": model.split_seed,
        "split_ratio": model.split_ratio,
        "per_class": {
            label: {
                "dtw_mean": stats.dtw_mean,
                "dtw_std": stats.dtw_std,
                "ed_mean": stats.ed_mean,
                "ed_std": stats.ed_std,
                "fingerprints": [fingerprint_to_dict(fp) for fp in stats.fingerprints],
            }
            for label, stats in sorted(model.per_class.items())
        },
    }


def model_from_dict(doc: dict) -> ThresholdModel:
    try:
        if doc["format"] != "threshold_model" or doc["schema_version"] != MODEL_SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported model document: format={doc.get('format')!r} "
                f"schema_version={doc.get('schema_version')!r}"
            )
        per_class = {
            label: ClassStats(
                dtw_mean=float(entry["dtw_mean"]),
                dtw_std=float(entry["dtw_std"]),
                ed_mean=float(entry["ed_mean"]),
                ed_std=float(entry["ed_std"]),
                fingerprints=tuple(fingerprint_from_dict(d) for d in entry["fingerprints"]),
            )
            for label, entry in doc["per_class"].items()
        }
        return ThresholdModel(
            metric=doc["metric"],
            split_seed=int(doc["split_seed"]),
            split_ratio=float(doc["split_ratio"]),
            per_class=per_class,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model document: {exc}") from exc


def save_model(model: ThresholdModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ThresholdModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: model document must be a JSON object")
    return model_from_dict(doc)

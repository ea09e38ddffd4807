"""Command-line surface: simulate, fingerprint, compare, train, classify,
evaluate, report.

Exit codes: 0 success, 1 domain error (one-line diagnostic on stderr),
2 usage error. All outputs are deterministic given identical inputs and
seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classifier, similarity, simulator
from .bocpd import BocpdConfig, run_length_posterior, segment
from .errors import PhaseprintError
from .fingerprint import build_fingerprint, load_fingerprint, save_fingerprint
from .ingest import normalize, parse_csv, write_csv

_CONFIG_FLAGS = (
    ("hazard", "hazard_lambda", float, 5000.0, "expected run length between change points"),
    ("prior-mean", "prior_mean", float, 0.0, "prior mean of the observation model"),
    ("prior-kappa", "prior_kappa", float, 1.0, "prior pseudo-count for the mean"),
    ("prior-alpha", "prior_alpha", float, 1.0, "inverse-gamma shape prior"),
    ("prior-beta", "prior_beta", float, 1.0, "inverse-gamma scale prior"),
    ("min-phase", "min_phase_len", int, 3, "minimum phase length in samples"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseprint",
        description="Fingerprint workloads from counter telemetry and detect unknown ones.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic telemetry runs as CSV")
    p.add_argument("--spec", help="workload suite JSON (default: built-in six-family suite)")
    p.add_argument("--runs", type=int, default=10, help="runs per family (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="base seed (default: %(default)s)")
    p.add_argument("--out", required=True, help="output directory for CSVs and manifest.json")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("fingerprint", help="build fingerprint JSON from telemetry CSV")
    p.add_argument("--input", required=True, help="telemetry CSV, or a directory of CSVs")
    p.add_argument("--out", required=True, help="fingerprint path (directory input: output directory)")
    p.add_argument("--label", help="workload label to record (single-file input)")
    p.add_argument("--run-id", help="run id to record (default: input file stem)")
    p.add_argument(
        "--debug-prefix",
        help="write <prefix>.runlength.csv and <prefix>.boundaries.csv (single-file input)",
    )
    for flag, _, type_, default, help_ in _CONFIG_FLAGS:
        p.add_argument(f"--{flag}", type=type_, default=default, help=f"{help_} (default: %(default)s)")
    p.set_defaults(handler=_cmd_fingerprint)

    p = sub.add_parser("compare", help="distance report between two fingerprints")
    p.add_argument("fingerprint_a")
    p.add_argument("fingerprint_b")
    p.add_argument(
        "--metric", choices=similarity.METRICS, default="squared",
        help="DTW pointwise metric (default: %(default)s)",
    )
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("train", help="fit per-workload thresholds from labeled fingerprints")
    p.add_argument("--fingerprints", required=True, help="directory of fingerprint JSON files")
    p.add_argument("--ratio", type=float, default=0.7, help="train split ratio (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="split shuffle seed (default: %(default)s)")
    p.add_argument(
        "--metric", choices=similarity.METRICS, default="squared",
        help="DTW pointwise metric (default: %(default)s)",
    )
    p.add_argument("--out", required=True, help="model JSON output path")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("classify", help="classify one fingerprint against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--fingerprint", required=True)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("evaluate", help="score a model on held-out fingerprints")
    p.add_argument("--model", required=True)
    p.add_argument("--fingerprints", required=True, help="directory of fingerprint JSON files")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("report", help="per-workload DTW/ED distance statistics as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(handler=_cmd_report)

    return parser


def _print_json(doc: dict) -> None:
    print(json.dumps(doc, indent=2))


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.runs < 1:
        raise PhaseprintError(f"--runs must be at least 1, got {args.runs}")
    specs = simulator.load_suite(args.spec) if args.spec else simulator.default_suite()
    names = [spec.family_name for spec in specs]
    if len(set(names)) != len(names):
        raise PhaseprintError(f"suite {args.spec}: family names must be unique")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict[str, dict] = {}
    for spec in specs:
        for i in range(args.runs):
            seed = args.seed + i
            matrix = simulator.generate_run(spec, seed)
            filename = f"{spec.family_name}__s{seed:05d}.csv"
            (out_dir / filename).write_text(write_csv(matrix), encoding="utf-8")
            manifest[filename] = {
                "workload_label": matrix.workload_label,
                "run_id": matrix.run_id,
                "seed": seed,
            }
    manifest_doc = {
        "schema_version": 1,
        "format": "suite_manifest",
        "runs_per_family": args.runs,
        "base_seed": args.seed,
        "files": manifest,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest_doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(manifest)} runs to {out_dir}")
    return 0


def _config_from_args(args: argparse.Namespace) -> BocpdConfig:
    kwargs = {}
    for flag, field_name, _, _, _ in _CONFIG_FLAGS:
        kwargs[field_name] = getattr(args, flag.replace("-", "_"))
    return BocpdConfig(**kwargs)


def _fingerprint_one(
    csv_path: Path,
    out_path: Path,
    config: BocpdConfig,
    label: str | None,
    run_id: str | None,
    debug_prefix: str | None,
) -> None:
    with open(csv_path, "rb") as stream:
        matrix = parse_csv(stream, run_id=run_id or csv_path.stem, workload_label=label)
    fp = build_fingerprint(matrix, config)
    save_fingerprint(fp, out_path)
    if debug_prefix:
        _write_debug_csvs(matrix, config, Path(debug_prefix))


def _write_debug_csvs(matrix, config: BocpdConfig, prefix: Path) -> None:
    runlength_lines = ["counter,timestep,map_run_length"]
    boundary_lines = ["counter,change_index"]
    for counter in matrix.counters:
        normalized = normalize(counter)
        posterior = run_length_posterior(normalized, config)
        for t, r in enumerate(posterior.map_run_length):
            runlength_lines.append(f"{counter.name},{t},{int(r)}")
        for c in segment(normalized, config).change_indices:
            boundary_lines.append(f"{counter.name},{c}")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.runlength.csv").write_text("\n".join(runlength_lines) + "\n", encoding="utf-8")
    Path(f"{prefix}.boundaries.csv").write_text("\n".join(boundary_lines) + "\n", encoding="utf-8")


def _cmd_fingerprint(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    input_path = Path(args.input)
    if not input_path.exists():
        raise PhaseprintError(f"input not found: {input_path}")

    if input_path.is_file():
        _fingerprint_one(input_path, Path(args.out), config, args.label, args.run_id, args.debug_prefix)
        print(f"wrote {args.out}")
        return 0

    # Directory mode: fingerprint every CSV, taking labels from manifest.json
    # when the directory carries one (as `simulate` leaves behind).
    if args.label or args.run_id or args.debug_prefix:
        raise PhaseprintError("--label/--run-id/--debug-prefix require a single-file --input")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = input_path / "manifest.json"
    manifest: dict[str, dict] = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8")).get("files", {})
    csv_paths = sorted(input_path.glob("*.csv"))
    if not csv_paths:
        raise PhaseprintError(f"no CSV files in {input_path}")
    for csv_path in csv_paths:
        entry = manifest.get(csv_path.name, {})
        _fingerprint_one(
            csv_path,
            out_dir / (csv_path.stem + ".json"),
            config,
            entry.get("workload_label"),
            entry.get("run_id"),
            None,
        )
    print(f"wrote {len(csv_paths)} fingerprints to {out_dir}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    fp_a = load_fingerprint(args.fingerprint_a)
    fp_b = load_fingerprint(args.fingerprint_b)
    report = similarity.workload_distance(fp_a, fp_b, args.metric)
    _print_json(
        {
            "ed": report.ed,
            "dtw": report.dtw,
            "metric": report.metric,
            "offset": report.offset,
            "aligned_pairs": [list(pair) for pair in report.aligned_pairs],
        }
    )
    return 0


def _load_fingerprint_dir(path_str: str) -> list:
    directory = Path(path_str)
    if not directory.is_dir():
        raise PhaseprintError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.json"))
    fingerprints = [load_fingerprint(p) for p in paths]
    if not fingerprints:
        raise PhaseprintError(f"no fingerprint JSON files in {directory}")
    return fingerprints


def _cmd_train(args: argparse.Namespace) -> int:
    fingerprints = _load_fingerprint_dir(args.fingerprints)
    train, validation = classifier.split_dataset(fingerprints, args.ratio, args.seed)
    model = classifier.fit(train, args.metric, split_seed=args.seed, split_ratio=args.ratio)
    classifier.save_model(model, args.out)
    print(
        f"trained on {len(train)} fingerprints across {len(model.per_class)} workloads "
        f"({len(validation)} held out); wrote {args.out}"
    )
    return 0


def _cmd_classify(args: argparse.Namespace) -> int:
    model = classifier.load_model(args.model)
    query = load_fingerprint(args.fingerprint)
    result = classifier.classify(model, query)
    _print_json(
        {
            "predicted": result.predicted,
            "best_distance": result.best_distance,
            "accepted": result.accepted,
            "runner_up": (
                {"label": result.runner_up[0], "distance": result.runner_up[1]}
                if result.runner_up
                else None
            ),
        }
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = classifier.load_model(args.model)
    fingerprints = _load_fingerprint_dir(args.fingerprints)
    trained = {
        (fp.workload_label, fp.run_id)
        for stats in model.per_class.values()
        for fp in stats.fingerprints
    }
    validation = [fp for fp in fingerprints if (fp.workload_label, fp.run_id) not in trained]
    if not validation:
        raise PhaseprintError("every fingerprint in the directory is part of the training set")
    metrics = classifier.evaluate(model, validation)
    _print_json(
        {
            "accuracy": metrics.accuracy,
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f1": metrics.f1,
            "n_validation": metrics.n_items,
            "confusion": metrics.confusion,
        }
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    model = classifier.load_model(args.model)
    lines = ["workload,dtw_mean,dtw_std,ed_mean,ed_std"]
    for label in sorted(model.per_class):
        stats = model.per_class[label]
        lines.append(
            f"{label},{stats.dtw_mean:.9g},{stats.dtw_std:.9g},{stats.ed_mean:.9g},{stats.ed_std:.9g}"
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except PhaseprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

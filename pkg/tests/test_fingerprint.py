from __future__ import annotations

import json

import numpy as np
import pytest
from statsmodels.tsa.stattools import adfuller

from phaseprint import (
    BocpdConfig,
    CounterSeries,
    SchemaError,
    SeriesTooShortError,
    TelemetryMatrix,
    adf_statistic,
    build_fingerprint,
    config_digest,
    load_fingerprint,
    save_fingerprint,
    summarize_phase,
)


def one_counter_matrix(samples, name="c", run_id="r"):
    return TelemetryMatrix(run_id=run_id, counters=(CounterSeries(name=name, samples=samples),))


class TestAdfStatistic:
    def test_constant_segment_is_degenerate(self):
        assert adf_statistic([3.0] * 6, lags=1) == (0.0, True)

    def test_too_short_segment_is_degenerate(self):
        assert adf_statistic([1.0, 2.0, 3.0, 4.0], lags=1) == (0.0, True)

    def test_matches_reference_implementation(self):
        # Same constant-only OLS regression as the reference; differences are
        # pure floating-point noise.
        rng = np.random.default_rng(0)
        series = {
            "noise": rng.normal(0, 1, 200),
            "walk": np.cumsum(np.random.default_rng(1).normal(0, 1, 200)),
        }
        for x in series.values():
            mine, degenerate = adf_statistic(x, lags=1)
            assert not degenerate
            reference = adfuller(x, maxlag=1, regression="c", autolag=None)[0]
            assert mine == pytest.approx(reference, abs=1e-10)

    def test_white_noise_rejects_unit_root(self):
        hits = 0
        for seed in range(100):
            stat, degenerate = adf_statistic(np.random.default_rng(seed).normal(0, 1, 200), lags=1)
            assert not degenerate
            hits += stat < -2.86
        assert hits >= 90

    def test_random_walk_keeps_unit_root(self):
        hits = 0
        for seed in range(100):
            walk = np.cumsum(np.random.default_rng(seed).normal(0, 1, 200))
            stat, _ = adf_statistic(walk, lags=1)
            hits += stat > -2.86
        assert hits >= 80

    def test_negative_lags_rejected(self):
        with pytest.raises(ValueError):
            adf_statistic([1.0, 2.0, 3.0], lags=-1)


class TestSummarizePhase:
    def test_constant_phase(self):
        summary = summarize_phase([2.0, 2.0, 2.0])
        assert summary.mean == 2.0
        assert summary.median == 2.0
        assert summary.variance == 0.0
        assert summary.skewness == 0.0
        assert summary.kurtosis == 0.0
        assert summary.adf_stat == 0.0
        assert summary.degenerate_adf
        assert summary.length == 3

    def test_hand_computed_moments(self):
        summary = summarize_phase([1.0, 2.0, 3.0, 4.0])
        assert summary.mean == pytest.approx(2.5)
        assert summary.median == pytest.approx(2.5)
        assert summary.variance == pytest.approx(1.25)

    def test_mirror_changes_only_adf(self):
        rng = np.random.default_rng(5)
        x = rng.normal(1.0, 0.5, 40)
        fwd = summarize_phase(x)
        rev = summarize_phase(x[::-1].copy())
        # Order-free statistics; only float summation order separates them.
        assert fwd.mean == pytest.approx(rev.mean, rel=1e-12)
        assert fwd.median == rev.median
        assert fwd.variance == pytest.approx(rev.variance, rel=1e-12)
        assert fwd.skewness == pytest.approx(rev.skewness, rel=1e-9)
        assert fwd.kurtosis == pytest.approx(rev.kurtosis, rel=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize_phase([])


class TestBuildFingerprint:
    def test_constant_counter(self, default_config):
        fp = build_fingerprint(one_counter_matrix([5.0] * 30), default_config)
        assert fp.q == 1
        assert fp.tensor.shape == (1, 1, 6)
        # A constant counter normalizes to zeros; its summary is all zero with
        # the degenerate-ADF flag alongside.
        assert np.all(fp.tensor == 0.0)
        assert fp.adf_degenerate == ((True,),)

    def test_padding_for_unequal_phase_counts(self, default_config):
        rng = np.random.default_rng(12)
        two = np.concatenate([rng.normal(100, 2, 60), rng.normal(220, 2, 120)])
        three = np.concatenate(
            [rng.normal(200, 5, 60), rng.normal(500, 5, 60), rng.normal(900, 5, 60)]
        )
        matrix = TelemetryMatrix(
            run_id="r",
            counters=(
                CounterSeries(name="a", samples=two),
                CounterSeries(name="b", samples=three),
            ),
        )
        fp = build_fingerprint(matrix, default_config)
        assert fp.phase_counts == (2, 3)
        assert fp.q == 3
        assert np.all(fp.tensor[0, 2, :] == 0.0)
        assert np.any(fp.tensor[1, 2, :] != 0.0)

    def test_three_counter_trace_shape(self, default_config):
        # Bandwidth-like counter with 3 phases, utilization-like with 2,
        # tlb-like with 3.
        rng = np.random.default_rng(12)
        bw = np.concatenate(
            [rng.normal(200, 5, 60), rng.normal(500, 5, 60), rng.normal(900, 5, 60)]
        )
        cpu = np.concatenate([rng.normal(30, 1, 60), rng.normal(75, 1, 120)])
        itlb = np.concatenate(
            [rng.normal(900, 8, 60), rng.normal(500, 8, 60), rng.normal(140, 8, 60)]
        )
        matrix = TelemetryMatrix(
            run_id="r",
            counters=(
                CounterSeries(name="memory_bandwidth", samples=bw),
                CounterSeries(name="cpu_utilization", samples=cpu),
                CounterSeries(name="itlb_misses", samples=itlb),
            ),
        )
        fp = build_fingerprint(matrix, default_config)
        assert fp.phase_counts == (3, 2, 3)
        assert fp.q == 3

    def test_deterministic(self, default_config):
        rng = np.random.default_rng(3)
        samples = np.concatenate([rng.normal(10, 1, 80), rng.normal(60, 1, 80)])
        a = build_fingerprint(one_counter_matrix(samples), default_config)
        b = build_fingerprint(one_counter_matrix(samples), default_config)
        assert np.array_equal(a.tensor, b.tensor)
        assert a.boundaries == b.boundaries

    def test_short_series_propagates(self, default_config):
        with pytest.raises(SeriesTooShortError):
            build_fingerprint(one_counter_matrix([1.0, 2.0, 3.0]), default_config)

    def test_doubled_run_converges(self, default_config):
        # Law-of-large-numbers smoke test: concatenating two runs of the same
        # stationary phase moves the single-phase summary by < 10%.
        rng = np.random.default_rng(0)
        single = rng.normal(100, 8, 200)
        doubled = np.concatenate([single, np.random.default_rng(1000).normal(100, 8, 200)])
        fp_single = build_fingerprint(one_counter_matrix(single), default_config)
        fp_double = build_fingerprint(one_counter_matrix(doubled), default_config)
        assert fp_single.q == fp_double.q == 1
        for index in (0, 2):  # mean, variance
            a = fp_single.tensor[0, 0, index]
            b = fp_double.tensor[0, 0, index]
            assert abs(b - a) / abs(a) < 0.10


class TestDigestAndPersistence:
    def test_digest_is_stable_and_sensitive(self):
        a = config_digest(BocpdConfig())
        assert a == config_digest(BocpdConfig())
        assert a != config_digest(BocpdConfig(hazard_lambda=100.0))
        assert len(a) == 64 and a == a.lower()

    def test_round_trip(self, tmp_path, default_config):
        rng = np.random.default_rng(8)
        samples = np.concatenate([rng.normal(5, 1, 80), rng.normal(50, 1, 80)])
        fp = build_fingerprint(one_counter_matrix(samples, run_id="run-7"), default_config)
        path = tmp_path / "fp.json"
        save_fingerprint(fp, path)
        loaded = load_fingerprint(path)
        assert loaded.run_id == fp.run_id
        assert loaded.workload_label == fp.workload_label
        assert loaded.counter_names == fp.counter_names
        assert loaded.phase_counts == fp.phase_counts
        assert loaded.boundaries == fp.boundaries
        assert loaded.adf_degenerate == fp.adf_degenerate
        assert loaded.config == fp.config
        assert loaded.config_digest == fp.config_digest
        # Tensor survives at 9 significant digits.
        assert np.allclose(loaded.tensor, fp.tensor, rtol=1e-8, atol=1e-12)

    def test_rejects_malformed_documents(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_fingerprint(path)
        path.write_text(json.dumps({"format": "fingerprint", "schema_version": 99}), encoding="utf-8")
        with pytest.raises(SchemaError):
            load_fingerprint(path)
        path.write_text(json.dumps({"format": "other", "schema_version": 1}), encoding="utf-8")
        with pytest.raises(SchemaError):
            load_fingerprint(path)

    def test_tensor_rounding_is_nine_significant_digits(self, tmp_path, default_config):
        fp = build_fingerprint(
            one_counter_matrix([1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]), default_config
        )
        save_fingerprint(fp, tmp_path / "fp.json")
        doc = json.loads((tmp_path / "fp.json").read_text())
        for value in doc["tensor"]:
            assert value == float(f"{value:.9g}")


class TestFingerprintInvariants:
    def test_padding_must_be_zero(self, default_config):
        rng = np.random.default_rng(12)
        two = np.concatenate([rng.normal(100, 2, 60), rng.normal(220, 2, 120)])
        three = np.concatenate(
            [rng.normal(200, 5, 60), rng.normal(500, 5, 60), rng.normal(900, 5, 60)]
        )
        matrix = TelemetryMatrix(
            run_id="r",
            counters=(
                CounterSeries(name="a", samples=two),
                CounterSeries(name="b", samples=three),
            ),
        )
        fp = build_fingerprint(matrix, default_config)
        tampered = fp.tensor.copy()
        tampered[0, 2, 0] = 1.0
        with pytest.raises(ValueError, match="padding"):
            build = dict(
                run_id=fp.run_id,
                workload_label=fp.workload_label,
                counter_names=fp.counter_names,
                duration=fp.duration,
                phase_counts=fp.phase_counts,
                tensor=tampered,
                boundaries=fp.boundaries,
                adf_degenerate=fp.adf_degenerate,
                config=fp.config,
                config_digest=fp.config_digest,
            )
            type(fp)(**build)

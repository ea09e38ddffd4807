from __future__ import annotations

import math

import numpy as np
import pytest

from phaseprint import (
    BocpdConfig,
    NormalizedSeries,
    PhaseBoundaries,
    SeriesTooShortError,
    initial_state,
    run_length_posterior,
    segment,
    step,
)


def raw_series(values, name="x"):
    return NormalizedSeries(name=name, values=np.asarray(values, float), source_mean=0.0, source_std=1.0)


def map_trace(values, config):
    state = initial_state(config)
    maps = [0]
    for x in values:
        state = step(state, x, config)
        maps.append(state.map_run_length)
    return maps


class TestConfig:
    def test_defaults(self):
        cfg = BocpdConfig()
        assert cfg.hazard_lambda == 5000.0
        assert cfg.min_phase_len == 3

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"hazard_lambda": 0.5},
            {"prior_kappa": 0.0},
            {"prior_alpha": -1.0},
            {"prior_beta": 0.0},
            {"min_phase_len": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            BocpdConfig(**kwargs)


class TestStep:
    def test_base_case_mass_on_zero(self, default_config):
        state = initial_state(default_config)
        assert state.t == 0
        assert list(state.run_lengths) == [0]
        assert np.allclose(np.exp(state.log_probs), [1.0])

    def test_first_observation_mass_on_one(self, default_config):
        state = step(initial_state(default_config), 0.37, default_config)
        probs = dict(zip(state.run_lengths.tolist(), np.exp(state.log_probs)))
        assert probs.get(1, 0.0) == pytest.approx(1.0)

    def test_rejects_non_finite(self, default_config):
        with pytest.raises(ValueError):
            step(initial_state(default_config), math.inf, default_config)

    def test_iid_map_growth(self, default_config):
        # MAP run length should keep growing on draws from one Gaussian.
        good = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            maps = map_trace(rng.normal(2.0, 1.0, 200), default_config)
            if all(maps[t] >= maps[t - 1] for t in range(6, 201)):
                good += 1
        assert good >= 95

    def test_map_collapse_after_shift(self, default_config):
        good = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            values = np.concatenate([rng.normal(0, 1, 100), rng.normal(5, 1, 100)])
            maps = map_trace(values, default_config)
            if any(m < 5 for m in maps[101:106]):
                good += 1
        assert good >= 95


class TestPosterior:
    def test_normalization_and_map_bound(self, default_config):
        rng = np.random.default_rng(9)
        values = np.concatenate([rng.normal(0, 1, 60), rng.normal(4, 1, 60)])
        posterior = run_length_posterior(raw_series(values), default_config)
        for t, row in enumerate(posterior.log_probs):
            assert row.shape == (t + 1,)
            assert np.exp(row).sum() == pytest.approx(1.0, abs=1e-9)
            assert posterior.map_run_length[t] <= t

    def test_pruning_matches_unpruned(self, default_config):
        rng = np.random.default_rng(4)
        values = np.concatenate([rng.normal(0, 1, 50), rng.normal(3, 1, 50)])
        series = raw_series(values)
        pruned = run_length_posterior(series, default_config)
        exact = run_length_posterior(series, default_config, prune_nats=math.inf)
        for a, b in zip(pruned.log_probs, exact.log_probs):
            assert np.abs(np.exp(a) - np.exp(b)).sum() <= 1e-6
        assert np.array_equal(pruned.map_run_length, exact.map_run_length)


class TestSegment:
    def test_constant_with_tiny_noise_has_no_change_points(self, default_config):
        rng = np.random.default_rng(7)
        values = 3.0 + rng.normal(0, 1e-3, 120)
        assert segment(raw_series(values), default_config).change_indices == ()

    def test_two_regime_step_recovery(self, default_config):
        good = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            values = np.concatenate([rng.normal(0, 1, 100), rng.normal(5, 1, 100)])
            found = segment(raw_series(values), default_config).change_indices
            if len(found) == 1 and 95 <= found[0] <= 105:
                good += 1
        assert good >= 95

    def test_three_regime_trace(self, default_config):
        rng = np.random.default_rng(2)
        values = np.concatenate(
            [rng.normal(1, 1, 60), rng.normal(5, 1, 70), rng.normal(9, 1, 50)]
        )
        found = segment(raw_series(values), default_config).change_indices
        assert len(found) == 2
        assert abs(found[0] - 60) <= 5 and abs(found[1] - 130) <= 5

    def test_too_short_series(self, default_config):
        with pytest.raises(SeriesTooShortError):
            segment(raw_series([1.0] * 5), default_config)

    def test_determinism(self, default_config):
        rng = np.random.default_rng(3)
        values = np.concatenate([rng.normal(0, 1, 80), rng.normal(4, 1, 80)])
        series = raw_series(values)
        assert (
            segment(series, default_config).change_indices
            == segment(series, default_config).change_indices
        )

    def test_time_reversal_mirror(self, default_config):
        for seed in (0, 5, 7):
            rng = np.random.default_rng(seed)
            values = np.concatenate([rng.normal(0, 1, 100), rng.normal(8, 1, 100)])
            forward = segment(raw_series(values), default_config).change_indices
            reverse = segment(raw_series(values[::-1].copy()), default_config).change_indices
            mirrored = tuple(len(values) - c for c in reversed(reverse))
            assert len(forward) == len(mirrored) == 1
            assert abs(forward[0] - mirrored[0]) <= default_config.min_phase_len

    def test_hazard_of_one_stays_finite(self):
        # lambda = 1 means a change every step: legal per the config contract
        # and must not produce NaNs or invalid boundaries.
        cfg = BocpdConfig(hazard_lambda=1.0)
        rng = np.random.default_rng(0)
        values = rng.normal(1.0, 0.5, 30)
        state = initial_state(cfg)
        for x in values:
            state = step(state, x, cfg)
            assert np.isfinite(state.log_probs).all()
        bounds = segment(raw_series(values), cfg)
        assert all(0 < c < 30 for c in bounds.change_indices)

    def test_hazard_monotonicity(self):
        rng = np.random.default_rng(0)
        two_regime = np.concatenate([rng.normal(0, 1, 100), rng.normal(3, 1, 100)])
        rng = np.random.default_rng(1)
        iid = rng.normal(2, 1, 160)
        for values in (two_regime, iid):
            series = raw_series(values)
            counts = [
                len(segment(series, BocpdConfig(hazard_lambda=lam)).change_indices)
                for lam in (20000.0, 5000.0, 1250.0, 300.0, 80.0, 20.0)
            ]
            assert all(b >= a for a, b in zip(counts, counts[1:])), counts


class TestPhaseBoundaries:
    def test_rejects_edges_and_disorder(self):
        with pytest.raises(ValueError):
            PhaseBoundaries(change_indices=(0,), series_length=10)
        with pytest.raises(ValueError):
            PhaseBoundaries(change_indices=(10,), series_length=10)
        with pytest.raises(ValueError):
            PhaseBoundaries(change_indices=(5, 5), series_length=10)

    def test_segments(self):
        bounds = PhaseBoundaries(change_indices=(3, 7), series_length=10)
        assert bounds.phase_count == 3
        assert bounds.segments() == ((0, 3), (3, 7), (7, 10))

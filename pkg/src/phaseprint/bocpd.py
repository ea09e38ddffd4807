"""Bayesian online change-point detection over a single counter series.

Run-length filtering in the style of Adams & MacKay (2007): the posterior
over "samples since the last change" is updated one observation at a time.
The observation model is a Normal with unknown mean and variance under a
Normal-Inverse-Gamma conjugate prior, so the one-step predictive density is
a Student-t. Change points are read off the posterior wherever the MAP run
length fails to keep growing.

Everything here is pure and deterministic: identical series and config give
bitwise-identical results, so per-counter segmentation can run in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import SeriesTooShortError
from .ingest import NormalizedSeries

# Hypotheses this far (in nats) below the per-step maximum are dropped. The
# discarded mass is ~e^-30 per step, far inside the 1e-6 posterior tolerance.
DEFAULT_PRUNE_NATS = 30.0


@dataclass(frozen=True)
class BocpdConfig:
    """Hazard, observation-model prior, and segment-length floor.

    hazard_lambda is the expected run length between change points, i.e. the
    prior change probability per step is 1/hazard_lambda. The four prior_*
    fields parameterize the Normal-Inverse-Gamma prior on the per-run mean
    and variance; their defaults suit normalized counter data (nonnegative,
    O(1)). The default hazard is deliberately high: with the heavy-tailed
    (df 2) prior predictive, smaller values false-alarm on plain Gaussian
    noise every few hundred samples.
    """

    hazard_lambda: float = 5000.0
    prior_mean: float = 0.0
    prior_kappa: float = 1.0
    prior_alpha: float = 1.0
    prior_beta: float = 1.0
    min_phase_len: int = 3

    def __post_init__(self) -> None:
        if not self.hazard_lambda >= 1.0:
            raise ValueError(f"hazard_lambda must be >= 1, got {self.hazard_lambda}")
        for field in ("prior_kappa", "prior_alpha", "prior_beta"):
            if not getattr(self, field) > 0.0:
                raise ValueError(f"{field} must be positive")
        if not self.min_phase_len >= 1:
            raise ValueError(f"min_phase_len must be >= 1, got {self.min_phase_len}")


@dataclass(frozen=True, eq=False)
class BocpdState:
    """Run-length posterior after t observations, with per-hypothesis
    Normal-Inverse-Gamma sufficient statistics. Arrays are aligned and
    ordered by ascending run length."""

    t: int
    run_lengths: np.ndarray
    log_probs: np.ndarray
    mu: np.ndarray
    kappa: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def map_run_length(self) -> int:
        """MAP run length; exact ties resolve to the smaller run length."""
        return int(self.run_lengths[int(np.argmax(self.log_probs))])


@dataclass(frozen=True, eq=False)
class RunLengthPosterior:
    """Dense per-timestep run-length distributions (log domain).

    Entry t is a length-(t+1) vector over run lengths 0..t; pruned or
    unreachable hypotheses hold -inf. map_run_length[t] is the argmax.
    """

    log_probs: tuple[np.ndarray, ...]
    map_run_length: np.ndarray


@dataclass(frozen=True)
class PhaseBoundaries:
    """Change-point indices interior to a series of series_length samples.

    A change index c starts a new segment at sample c, so the implied
    segments are [0, c_1), [c_1, c_2), ..., [c_M, series_length).
    """

    change_indices: tuple[int, ...]
    series_length: int

    def __post_init__(self) -> None:
        indices = tuple(int(c) for c in self.change_indices)
        if any(c <= 0 or c >= self.series_length for c in indices):
            raise ValueError(f"change indices must be interior to (0, {self.series_length})")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("change indices must be strictly increasing")
        object.__setattr__(self, "change_indices", indices)

    @property
    def phase_count(self) -> int:
        return len(self.change_indices) + 1

    def segments(self) -> tuple[tuple[int, int], ...]:
        edges = (0,) + self.change_indices + (self.series_length,)
        return tuple(zip(edges[:-1], edges[1:]))


def initial_state(config: BocpdConfig) -> BocpdState:
    """State before any observation: run length 0 with probability 1."""
    return BocpdState(
        t=0,
        run_lengths=np.array([0], dtype=np.int64),
        log_probs=np.array([0.0]),
        mu=np.array([config.prior_mean]),
        kappa=np.array([config.prior_kappa]),
        alpha=np.array([config.prior_alpha]),
        beta=np.array([config.prior_beta]),
    )


def _logsumexp(a: np.ndarray) -> float:
    # scipy.special.logsumexp carries too much per-call overhead for this
    # hot loop; the arrays here are small 1-D floats.
    m = a.max()
    if m == -np.inf:
        return -np.inf
    return float(m + np.log(np.exp(a - m).sum()))


def _student_t_logpdf(x: float, df: np.ndarray, loc: np.ndarray, scale: np.ndarray) -> np.ndarray:
    z = (x - loc) / scale
    return (
        gammaln((df + 1.0) / 2.0)
        - gammaln(df / 2.0)
        - 0.5 * np.log(df * np.pi)
        - np.log(scale)
        - (df + 1.0) / 2.0 * np.log1p(z * z / df)
    )


def step(
    state: BocpdState,
    observation: float,
    config: BocpdConfig,
    *,
    prune_nats: float = DEFAULT_PRUNE_NATS,
) -> BocpdState:
    """Advance the run-length posterior by one observation.

    Each hypothesis either grows by one (weighted by its Student-t predictive
    times 1 - 1/hazard_lambda) or collapses into run length 0 (predictive
    times accumulated mass times 1/hazard_lambda); the result is renormalized
    in the log domain. The first observation deterministically opens run
    length 1: an empty prefix has no run to break.

    Pass prune_nats=math.inf to disable hypothesis pruning.
    """
    x = float(observation)
    if not math.isfinite(x):
        raise ValueError(f"observation must be finite, got {observation!r}")

    lam = config.hazard_lambda

    df = 2.0 * state.alpha
    scale = np.sqrt(state.beta * (state.kappa + 1.0) / (state.alpha * state.kappa))
    log_pred = _student_t_logpdf(x, df, state.mu, scale)

    weighted = state.log_probs + log_pred
    if state.t == 0:
        # No hazard split on the first observation; it opens run length 1.
        log_growth = weighted
        log_change = -math.inf
    else:
        log_growth_factor = -math.inf if lam == 1.0 else math.log1p(-1.0 / lam)
        log_growth = weighted + log_growth_factor
        log_change = _logsumexp(weighted) - math.log(lam)

    new_run_lengths = np.concatenate(([0], state.run_lengths + 1))
    new_log_probs = np.concatenate(([log_change], log_growth))
    new_log_probs -= _logsumexp(new_log_probs)

    # Posterior update for grown hypotheses; slot 0 restarts from the prior.
    new_mu = np.concatenate(([config.prior_mean], (state.kappa * state.mu + x) / (state.kappa + 1.0)))
    new_kappa = np.concatenate(([config.prior_kappa], state.kappa + 1.0))
    new_alpha = np.concatenate(([config.prior_alpha], state.alpha + 0.5))
    new_beta = np.concatenate(
        ([config.prior_beta], state.beta + state.kappa * (x - state.mu) ** 2 / (2.0 * (state.kappa + 1.0)))
    )

    keep = new_log_probs >= new_log_probs.max() - prune_nats
    if not keep.all():
        new_run_lengths = new_run_lengths[keep]
        new_log_probs = new_log_probs[keep]
        new_log_probs -= _logsumexp(new_log_probs)
        new_mu = new_mu[keep]
        new_kappa = new_kappa[keep]
        new_alpha = new_alpha[keep]
        new_beta = new_beta[keep]

    return BocpdState(
        t=state.t + 1,
        run_lengths=new_run_lengths,
        log_probs=new_log_probs,
        mu=new_mu,
        kappa=new_kappa,
        alpha=new_alpha,
        beta=new_beta,
    )


def run_length_posterior(
    series: NormalizedSeries,
    config: BocpdConfig,
    *,
    prune_nats: float = DEFAULT_PRUNE_NATS,
) -> RunLengthPosterior:
    """Filter the whole series and keep every timestep's distribution.

    Memory grows quadratically with series length; use segment() when only
    the boundaries are needed.
    """
    state = initial_state(config)
    dense = [np.array([0.0])]
    maps = [0]
    for x in series.values:
        state = step(state, x, config, prune_nats=prune_nats)
        row = np.full(state.t + 1, -np.inf)
        row[state.run_lengths] = state.log_probs
        dense.append(row)
        maps.append(state.map_run_length)
    return RunLengthPosterior(log_probs=tuple(dense), map_run_length=np.array(maps, dtype=np.int64))


def segment(series: NormalizedSeries, config: BocpdConfig) -> PhaseBoundaries:
    """Detect phase boundaries in one counter series.

    A change point is declared at index t - r whenever the MAP run length r
    at timestep t fails to increment. Declared points closer together than
    min_phase_len are merged keeping the earlier one, and points that would
    leave a leading or trailing segment shorter than min_phase_len are
    dropped.
    """
    values = series.values
    n = len(values)
    if n < 2 * config.min_phase_len:
        raise SeriesTooShortError(
            f"series {series.name!r}: need at least {2 * config.min_phase_len} samples, got {n}"
        )

    state = initial_state(config)
    declared = set()
    prev_map = 0
    for t, x in enumerate(values, start=1):
        state = step(state, x, config)
        r = state.map_run_length
        if r < prev_map + 1:
            declared.add(t - r)
        prev_map = r

    merged: list[int] = []
    for c in sorted(declared):
        if merged and c - merged[-1] < config.min_phase_len:
            continue
        merged.append(c)
    kept = tuple(c for c in merged if config.min_phase_len <= c <= n - config.min_phase_len)
    return PhaseBoundaries(change_indices=kept, series_length=n)

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from phaseprint import BocpdConfig, Fingerprint, PhaseBoundaries, config_digest

settings.register_profile("ci", deadline=None, max_examples=100, derandomize=True)
settings.load_profile("ci")


def make_fingerprint(
    tensor,
    phase_counts,
    label: str | None = "family",
    run_id: str = "run-0",
    duration: int = 60,
    config: BocpdConfig | None = None,
) -> Fingerprint:
    """Assemble a structurally valid Fingerprint around a handmade tensor.

    Change indices are evenly spaced; only the tensor content matters to the
    distance-layer tests that use this.
    """
    config = config or BocpdConfig()
    tensor = np.asarray(tensor, dtype=np.float64)
    n, q, k = tensor.shape
    boundaries = []
    flags = []
    for p in phase_counts:
        step = duration // p
        boundaries.append(
            PhaseBoundaries(
                change_indices=tuple(step * i for i in range(1, p)),
                series_length=duration,
            )
        )
        flags.append(tuple([False] * p))
    return Fingerprint(
        run_id=run_id,
        workload_label=label,
        counter_names=tuple(f"c{i}" for i in range(n)),
        duration=duration,
        phase_counts=tuple(phase_counts),
        tensor=tensor,
        boundaries=tuple(boundaries),
        adf_degenerate=tuple(flags),
        config=config,
        config_digest=config_digest(config),
    )


@pytest.fixture
def default_config() -> BocpdConfig:
    return BocpdConfig()

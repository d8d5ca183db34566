"""Shared fixtures and builders for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wavegates import (
    Channel,
    ConductiveGrid,
    GeometrySpec,
    PotentialTrace,
    synthesize,
)

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


def channel_grid(length: int = 60, width: int = 5, margin: int = 2) -> ConductiveGrid:
    """Horizontal channel centered vertically in a snug grid."""
    height = width + 2 * margin
    y = height // 2
    spec = GeometrySpec((Channel(start=(0, y), end=(length - 1, y), width=width),))
    return synthesize(length, height, spec)


def make_trace(ts, ps, electrode: str = "E1", pair: str = "01") -> PotentialTrace:
    return PotentialTrace(
        electrode=electrode,
        pair=pair,
        t=np.asarray(ts, dtype=np.int64),
        p=np.asarray(ps, dtype=float),
    )


def tiny_config_dict() -> dict:
    """Small three-pair scenario exercising every analysis, fast to run."""
    return {
        "grid": {
            "geometry": {
                "width": 80,
                "height": 9,
                "shapes": [
                    {"type": "channel", "start": [0, 4], "end": [79, 4], "width": 5}
                ],
            }
        },
        "params": {"c2": 0.1},
        "electrodes": [
            {"label": "E7", "x": 6, "y": 4},
            {"label": "E17", "x": 73, "y": 4},
            {"label": "M1", "x": 40, "y": 4},
        ],
        "inputs": ["E7", "E17"],
        "pairs": ["01", "10", "11"],
        "n_iters": 4000,
        "stimulus": {"mode": "impulse", "radius": 5.0},
        "analyses": ["spiking", "frequency", "activity", "structural"],
        "activity": {"tail_start": 0, "intervals": [[0.0, 1.0]]},
        "structural": {
            "regions": [
                {"label": "near-x", "center": [10, 4], "radius": 2.0},
                {"label": "mid", "center": [40, 4], "radius": 2.0},
            ]
        },
    }


@pytest.fixture
def tiny_config():
    return tiny_config_dict()

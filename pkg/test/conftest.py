"""Pytest configuration and fixtures for flowcodec tests."""
import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from flowcodec.config import Runtime
from flowcodec.log import RunLog
from flowcodec.media import SyntheticSpec, VideoVolume, make_synthetic
from flowcodec.model import make_preset

# Desk-scale training experiments are opt-in: each one trains tiny models for
# minutes on CPU. Set FLOWCODEC_ACCEPTANCE=1 to run them.
ACCEPTANCE = os.environ.get("FLOWCODEC_ACCEPTANCE") == "1"
ACCEPTANCE_SKIP_REASON = "set FLOWCODEC_ACCEPTANCE=1 to run desk-scale training experiments"


@pytest.fixture(autouse=True)
def _quiet_runtime():
    """Single-threaded, no progress bars, warnings only; restored after each test."""
    saved = (Runtime.threads, Runtime.progress, Runtime.log_level)
    Runtime.threads, Runtime.progress, Runtime.log_level = 1, False, "warn"
    yield
    Runtime.threads, Runtime.progress, Runtime.log_level = saved


@pytest.fixture
def quiet_log():
    """A RunLog that records but prints nothing below error."""
    from rich.console import Console

    return RunLog(console=Console(quiet=True), level="error")


@pytest.fixture
def tiny_video():
    """16×12×4 synthetic clip: moving background plus a small sprite."""
    video, _ = make_synthetic(SyntheticSpec(width=16, height=12, frames=4, sprite_size=4,
                                            background_velocity=(1.0, 0.0),
                                            sprite_velocity=(-1.0, 1.0), seed=3))
    return video


@pytest.fixture
def constant_video():
    """16×16×8 video of one flat color."""
    frames = np.empty((8, 16, 16, 3), dtype=np.float32)
    frames[...] = np.array([0.2, 0.5, 0.7], dtype=np.float32)
    return VideoVolume(frames, source="constant")


@pytest.fixture
def tiny_model():
    """A fresh 2-layer tiny-preset model sized for a 16×12×4 clip. The final
    flow linears are perturbed so the warp is not the identity."""
    model = make_preset("tiny", 2, seed=7, width=16, height=12, frames=4)
    rng = np.random.default_rng(11)
    for layer in model.layers:
        last = layer.flow.mlp.layers[-1]
        last.weight.data[...] = rng.normal(0.0, 0.05, last.weight.shape)
        last.bias.data[...] = rng.normal(0.0, 0.05, last.bias.shape)
    return model


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers",
        "acceptance: desk-scale training experiments (set FLOWCODEC_ACCEPTANCE=1)"
    )

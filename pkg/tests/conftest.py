"""Pytest configuration and fixtures."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from covert_ppm.asymptotics import channel_constants  # noqa: E402
from covert_ppm.config import ExperimentConfig  # noqa: E402
from covert_ppm.dmc_core import CovertChannelPair  # noqa: E402
from covert_ppm.verification import random_channel_pair  # noqa: E402

DEFAULT_P_MAIN = 0.11
DEFAULT_P_WARDEN = 0.45


@pytest.fixture
def default_channel():
    """BSC(0.11) to the receiver and BSC(0.45) to the warden."""
    return CovertChannelPair.bsc(DEFAULT_P_MAIN, DEFAULT_P_WARDEN)


@pytest.fixture
def default_constants(default_channel):
    """Exact channel constants of the default channel pair."""
    return channel_constants(default_channel)


@pytest.fixture
def bsc_pair():
    """Factory for BSC pairs: bsc_pair(p_main, p_warden)."""

    def make(
        p_main: float = DEFAULT_P_MAIN, p_warden: float = DEFAULT_P_WARDEN
    ) -> CovertChannelPair:
        return CovertChannelPair.bsc(p_main, p_warden)

    return make


@pytest.fixture
def random_channels():
    """Factory for seeded random channel pairs: random_channels(count, seed, max_outputs)."""

    def make(count: int, seed: int = 0, max_outputs: int = 4):
        rng = np.random.default_rng(seed)
        return [random_channel_pair(rng, max_outputs) for _ in range(count)]

    return make


@pytest.fixture
def default_config():
    """Default experiment config."""
    return ExperimentConfig()


@pytest.fixture
def small_config(tmp_path):
    """Config with a short grid and a small Monte Carlo run, writing under tmp_path."""
    return ExperimentConfig(
        n_grid=(10**4, 10**6),
        out=str(tmp_path / "out.csv"),
        trials=2000,
        n=16,
        ell=2,
        M=4,
        K=2,
    )

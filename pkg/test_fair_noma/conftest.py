"""Shared fixtures for the fair-noma tests."""
import pytest
from model import ChannelPair, SystemParams
from monte_carlo import McConfig
from config import WORKERS_ENVIRONMENT_VARIABLE


@pytest.fixture
def unit_params() -> SystemParams:
    """beta = 1 and xi = 1 (0 dB)."""
    return SystemParams(1.0, 1.0)


@pytest.fixture
def params_10db() -> SystemParams:
    """beta = 1 and xi = 10 (10 dB)."""
    return SystemParams(10.0, 1.0)


@pytest.fixture
def pair_1_4() -> ChannelPair:
    """The worked-example pair."""
    return ChannelPair(1.0, 4.0)


@pytest.fixture
def small_blocks() -> McConfig:
    """Small blocks, so short runs still span several substreams."""
    return McConfig(block_size=8192)


@pytest.fixture(autouse=True)
def no_worker_override(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep a worker count exported in the shell from leaking into the tests."""
    monkeypatch.delenv(WORKERS_ENVIRONMENT_VARIABLE, raising=False)

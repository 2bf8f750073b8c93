"""The two-user i.i.d. Rayleigh fading channel."""
from __future__ import annotations
import logging
import numpy as np
import numpy.typing as npt
from typing import Union
from model import ChannelPair, DomainError, SystemParams

logger = logging.getLogger(__name__)

ARRAY_TYPE = npt.NDArray[np.float64]
GAIN_TYPE = Union[float, ARRAY_TYPE]


class RandomStream:
    """
    A reproducible source of random numbers.

    Each `(seed, stream_id)` names an independent substream of the same seed, so blocks of a
    Monte Carlo run can be sampled in any order or in parallel and still give the same numbers.
    """

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        """
        Start the substream.

        :param seed: A 64-bit seed shared by all substreams of a run.
        :param stream_id: The index of the substream.
        """
        if not (0 <= seed < 2 ** 64):
            raise DomainError(f"The seed must be a 64-bit unsigned integer, got {seed}.")
        if stream_id < 0:
            raise DomainError(f"The stream id must be non-negative, got {stream_id}.")
        self.seed = seed
        self.stream_id = stream_id
        self.rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream_id,)))

    def __repr__(self) -> str:
        """Get the seed and the substream."""
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


def _exponential(rng: np.random.Generator, beta: float, n: int) -> ARRAY_TYPE:
    """Draw `n` strictly positive Exponential(mean beta) gains by inverting the CDF."""
    gains = -beta * np.log1p(-rng.random(n))
    zeros = gains <= 0
    while np.any(zeros):
        logger.debug(f"Resampling {int(np.count_nonzero(zeros))} zero gains.")
        gains[zeros] = -beta * np.log1p(-rng.random(int(np.count_nonzero(zeros))))
        zeros = gains <= 0
    return gains


def sample_pairs(params: SystemParams, stream: RandomStream, n: int) -> tuple[ARRAY_TYPE, ARRAY_TYPE]:
    """
    Draw `n` ordered channel pairs.

    :param params: The system parameters. Only beta is used.
    :param stream: The random stream to draw from.
    :param n: The number of pairs.
    :return: The weak gains and the strong gains.
    """
    if n < 1:
        raise DomainError(f"At least one pair must be sampled, got {n}.")
    first = _exponential(stream.rng, params.beta, n)
    second = _exponential(stream.rng, params.beta, n)
    return np.minimum(first, second), np.maximum(first, second)


def sample_pair(params: SystemParams, stream: RandomStream) -> ChannelPair:
    """
    Draw one ordered channel pair.

    :param params: The system parameters. Only beta is used.
    :param stream: The random stream to draw from.
    :return: Two independent Exponential(beta) gains sorted into (weak, strong).
    """
    weak, strong = sample_pairs(params, stream, 1)
    return ChannelPair(float(weak[0]), float(strong[0]))


def _check_gain(name: str, x: GAIN_TYPE) -> ARRAY_TYPE:
    values = np.asarray(x, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise DomainError(f"{name} must be non-negative.")
    return values


def ordered_joint_pdf(params: SystemParams, x1: GAIN_TYPE, x2: GAIN_TYPE) -> GAIN_TYPE:
    """
    Get the joint density of the ordered gains (weak, strong).

    f(x1, x2) = (2 / beta^2) e^(-(x1 + x2) / beta) for 0 <= x1 <= x2, else 0.

    :param params: The system parameters. Only beta is used.
    :param x1: The weak gain.
    :param x2: The strong gain.
    """
    weak = _check_gain("x1", x1)
    strong = _check_gain("x2", x2)
    beta = params.beta
    density = np.where(weak <= strong, 2 / beta ** 2 * np.exp(-(weak + strong) / beta), 0.0)
    return float(density) if density.ndim == 0 else density


def weak_gain_pdf(params: SystemParams, x: GAIN_TYPE) -> GAIN_TYPE:
    """Get the density of the weak gain, the minimum of two Exponential(beta) draws."""
    gain = _check_gain("x", x)
    density = 2 / params.beta * np.exp(-2 * gain / params.beta)
    return float(density) if density.ndim == 0 else density


def strong_gain_pdf(params: SystemParams, x: GAIN_TYPE) -> GAIN_TYPE:
    """Get the density of the strong gain, the maximum of two Exponential(beta) draws."""
    gain = _check_gain("x", x)
    density = 2 / params.beta * np.exp(-gain / params.beta) * -np.expm1(-gain / params.beta)
    return float(density) if density.ndim == 0 else density

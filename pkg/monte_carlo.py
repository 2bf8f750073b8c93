"""
Seeded Monte Carlo estimates of ergodic capacities.

Samples are split into fixed-size blocks. Block `i` always draws from substream `i` of the seed, and block moments are
merged in block order, so the result is the same bit for bit whatever the number of worker processes.
"""
from __future__ import annotations
import logging
import math
import numpy as np
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional
from channel_model import ARRAY_TYPE, RandomStream, sample_pairs
from model import CAPACITY_QUANTITIES, DomainError, McResult, PolicyKind, Quantity, SystemParams
from noma_core import bound, noma_rates, oma_rate
from timer import Timer

logger = logging.getLogger(__name__)

MOMENTS_TYPE = tuple[int, float, float]  # (count, mean, sum of squared deviations)
BLOCK_TASK_TYPE = tuple[SystemParams, "AllocationPolicy", tuple[Quantity, ...], int, int, int, bool]


@dataclass(frozen=True)
class AllocationPolicy:
    """How the power allocation coefficient is picked for each sampled channel pair."""

    kind: PolicyKind = PolicyKind.MIDPOINT
    fixed_value: Optional[float] = None
    """The coefficient used by the `fixed` policy."""

    def __post_init__(self) -> None:
        """Check that a fixed policy has a coefficient in (0, 1)."""
        if self.kind == PolicyKind.FIXED:
            if self.fixed_value is None or not (0 < self.fixed_value < 1):
                raise DomainError(f"A fixed policy needs a coefficient in (0, 1), got {self.fixed_value}.")

    @classmethod
    def fixed(cls, a: float) -> AllocationPolicy:
        """Use the same coefficient for every pair."""
        return cls(PolicyKind.FIXED, a)

    def allocations(self, xi: float, g_weak: ARRAY_TYPE, g_strong: ARRAY_TYPE) -> ARRAY_TYPE:
        """
        Get the coefficient for every pair.

        The region-relative policies recompute [a_inf, a_sup] from each pair's gains.
        """
        if self.kind == PolicyKind.FIXED:
            return np.full_like(g_weak, self.fixed_value)
        a_inf = np.asarray(bound(xi * g_strong))
        if self.kind == PolicyKind.AT_INF:
            return a_inf
        a_sup = np.asarray(bound(xi * g_weak))
        if self.kind == PolicyKind.AT_SUP:
            return a_sup
        return 0.5 * (a_inf + a_sup)

    @property
    def label(self) -> str:
        """A short name for output rows."""
        return f"fixed={self.fixed_value:g}" if self.kind == PolicyKind.FIXED else self.kind.value


@dataclass(frozen=True)
class McConfig:
    """How a Monte Carlo run is split into work."""

    block_size: int = 65536
    workers: int = 1
    tie_gains: bool = False
    """Give the strong user the weak user's gain on every sample. Probes the equal-gain edge of the fair region."""

    def __post_init__(self) -> None:
        """Check the block size and the worker count."""
        if self.block_size < 1:
            raise DomainError(f"The block size must be positive, got {self.block_size}.")
        if self.workers < 1:
            raise DomainError(f"At least one worker is needed, got {self.workers}.")


DEFAULT_MC = McConfig()


def sample_values(params: SystemParams, policy: AllocationPolicy, quantities: Sequence[Quantity],
                  g_weak: ARRAY_TYPE, g_strong: ARRAY_TYPE) -> dict[Quantity, ARRAY_TYPE]:
    """
    Get the per-sample value of each statistic.

    :param params: The system parameters.
    :param policy: Picks the allocation of each pair. Unused by the OMA statistics.
    :param quantities: The statistics to compute.
    :param g_weak: The weak gains.
    :param g_strong: The strong gains.
    """
    xi = params.xi
    c1_oma = np.asarray(oma_rate(xi, g_weak))
    c2_oma = np.asarray(oma_rate(xi, g_strong))
    values = {Quantity.C1_OMA: c1_oma, Quantity.C2_OMA: c2_oma, Quantity.SUM_OMA: c1_oma + c2_oma}
    if any(not quantity.is_oma for quantity in quantities):
        c1, c2 = noma_rates(xi, g_weak, g_strong, policy.allocations(xi, g_weak, g_strong))
        c1_noma, c2_noma = np.asarray(c1), np.asarray(c2)
        values[Quantity.C1_NOMA] = c1_noma
        values[Quantity.C2_NOMA] = c2_noma
        values[Quantity.SUM_NOMA] = c1_noma + c2_noma
        values[Quantity.SUM_GAP] = (c1_noma - c1_oma) + (c2_noma - c2_oma)
    if Quantity.A_INF in quantities:
        values[Quantity.A_INF] = np.asarray(bound(xi * g_strong))
    if Quantity.A_SUP in quantities:
        values[Quantity.A_SUP] = np.asarray(bound(xi * g_weak))
    return {quantity: values[quantity] for quantity in quantities}


def _run_block(task: BLOCK_TASK_TYPE) -> list[MOMENTS_TYPE]:
    """Sample one block and get the moments of each statistic."""
    params, policy, quantities, block_index, n, seed, tie_gains = task
    g_weak, g_strong = sample_pairs(params, RandomStream(seed, block_index), n)
    if tie_gains:
        g_strong = g_weak.copy()
    moments = []
    for quantity, values in sample_values(params, policy, quantities, g_weak, g_strong).items():
        mean = float(np.mean(values))
        moments.append((n, mean, float(np.sum((values - mean) ** 2))))
    return moments


def merge_moments(left: MOMENTS_TYPE, right: MOMENTS_TYPE) -> MOMENTS_TYPE:
    """Combine the moments of two disjoint sets of samples."""
    n_left, mean_left, m2_left = left
    n_right, mean_right, m2_right = right
    count = n_left + n_right
    delta = mean_right - mean_left
    mean = mean_left + delta * n_right / count
    m2 = m2_left + m2_right + delta * delta * n_left * n_right / count
    return count, mean, m2


def _block_sizes(n_samples: int, block_size: int) -> list[int]:
    full, rest = divmod(n_samples, block_size)
    return [block_size] * full + ([rest] if rest else [])


def estimate_many(params: SystemParams, policy: AllocationPolicy, quantities: Iterable[Quantity], n_samples: int,
                  seed: int, config: McConfig = DEFAULT_MC) -> dict[Quantity, McResult]:
    """
    Estimate several statistics from the same channel pairs.

    :param params: The system parameters.
    :param policy: Picks the allocation of each pair.
    :param quantities: The statistics to estimate.
    :param n_samples: The number of channel pairs.
    :param seed: The 64-bit seed.
    :param config: The block size, the number of worker processes and the equal-gain switch.
    :return: The mean and the standard error of each statistic.
    """
    wanted = tuple(dict.fromkeys(Quantity(quantity) for quantity in quantities))
    if not wanted:
        raise DomainError("No statistic was requested.")
    if n_samples < 1:
        raise DomainError(f"At least one sample is needed, got {n_samples}.")
    RandomStream(seed)  # Checks the seed before any work is handed out.
    tasks = [(params, policy, wanted, index, size, seed, config.tie_gains)
             for index, size in enumerate(_block_sizes(n_samples, config.block_size))]
    timer = Timer()
    if config.workers > 1 and len(tasks) > 1:
        with Pool(processes=min(config.workers, len(tasks))) as pool:
            block_moments = pool.map(_run_block, tasks)
    else:
        block_moments = [_run_block(task) for task in tasks]

    results = {}
    for position, quantity in enumerate(wanted):
        total = block_moments[0][position]
        for moments in block_moments[1:]:
            total = merge_moments(total, moments[position])
        count, mean, m2 = total
        std_error = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
        results[quantity] = McResult(mean, std_error, count, seed)
    logger.debug(f"{n_samples} samples in {len(tasks)} blocks at xi={params.xi:g} with {policy.label} took "
                 f"{timer.time_since_reset():.2f} s.")
    return results


def estimate(params: SystemParams, policy: AllocationPolicy, quantity: Quantity, n_samples: int, seed: int,
             config: McConfig = DEFAULT_MC) -> McResult:
    """
    Estimate the expected value of one capacity.

    :param params: The system parameters.
    :param policy: Picks the allocation of each pair. OMA capacities ignore it.
    :param quantity: One of the six OMA/NOMA per-user or sum capacities.
    :param n_samples: The number of channel pairs.
    :param seed: The 64-bit seed.
    :param config: The block size, the number of worker processes and the equal-gain switch.
    """
    quantity = Quantity(quantity)
    if quantity not in CAPACITY_QUANTITIES:
        raise DomainError(f"{quantity.value} is not a capacity. Choose from {[q.value for q in CAPACITY_QUANTITIES]}.")
    return estimate_many(params, policy, [quantity], n_samples, seed, config)[quantity]


def paired_gap(params: SystemParams, policy: AllocationPolicy, n_samples: int, seed: int,
               config: McConfig = DEFAULT_MC) -> McResult:
    """
    Estimate E[S_N(a) - S_O] with both sums evaluated on the same channel pairs.

    :param params: The system parameters.
    :param policy: Picks the allocation of each pair.
    :param n_samples: The number of channel pairs.
    :param seed: The 64-bit seed.
    :param config: The block size, the number of worker processes and the equal-gain switch.
    """
    return estimate_many(params, policy, [Quantity.SUM_GAP], n_samples, seed, config)[Quantity.SUM_GAP]


def region_markers(params: SystemParams, n_samples: int, seed: int,
                   config: McConfig = DEFAULT_MC) -> tuple[McResult, McResult]:
    """Estimate E[a_inf] and E[a_sup], the average edges of the fair region."""
    results = estimate_many(params, AllocationPolicy(), [Quantity.A_INF, Quantity.A_SUP], n_samples, seed, config)
    return results[Quantity.A_INF], results[Quantity.A_SUP]

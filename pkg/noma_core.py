"""
Instantaneous OMA and NOMA capacities of two users and the Fair-NOMA power allocation region.

The functions whose names end in `_rate` or `_rates`, `bound` and `sqrt1pm1` work elementwise on numpy arrays so the
Monte Carlo engine can evaluate whole blocks of channel pairs. The other operations take the typed values in `model`.
"""
from __future__ import annotations
import logging
import math
import numpy as np
from typing import Union
from channel_model import ARRAY_TYPE
from model import (ALLOCATION_TYPE, CapacityReport, ChannelPair, DomainError, FairRegion,
                   SystemParams, as_allocation)

logger = logging.getLogger(__name__)

VALUE_TYPE = Union[float, ARRAY_TYPE]
LN2 = math.log(2.0)
CAPACITY_FLOOR = 1e-300  # Capacities below this are reported as 0.


def _scalar_or_array(values: ARRAY_TYPE) -> VALUE_TYPE:
    return float(values) if values.ndim == 0 else values


def sqrt1pm1(y: VALUE_TYPE) -> VALUE_TYPE:
    """
    Get sqrt(1 + y) - 1 without cancellation for small y.

    Uses the rationalised form y / (1 + sqrt(1 + y)).
    """
    values = np.asarray(y, dtype=float)
    return _scalar_or_array(values / (1.0 + np.sqrt(1.0 + values)))


def bound(y: VALUE_TYPE) -> VALUE_TYPE:
    """
    Get the allocation bound as a function of the received SNR y = xi * g.

    (sqrt(1 + y) - 1) / y, evaluated as 1 / (1 + sqrt(1 + y)), which is exact in the limit y -> 0.
    """
    values = np.asarray(y, dtype=float)
    return _scalar_or_array(1.0 / (1.0 + np.sqrt(1.0 + values)))


def _clamp(capacity: ARRAY_TYPE) -> ARRAY_TYPE:
    return np.where(capacity < CAPACITY_FLOOR, 0.0, capacity)


def oma_rate(xi: float, g: VALUE_TYPE) -> VALUE_TYPE:
    """Get (1/2) log2(1 + xi g) elementwise."""
    gains = np.asarray(g, dtype=float)
    return _scalar_or_array(_clamp(0.5 * np.log1p(xi * gains) / LN2))


def noma_rates(xi: float, g_weak: VALUE_TYPE, g_strong: VALUE_TYPE,
               a: VALUE_TYPE) -> tuple[VALUE_TYPE, VALUE_TYPE]:
    """
    Get the NOMA capacities of both users elementwise.

    C1 = log2(1 + (1 - a) xi g1 / (a xi g1 + 1)) is evaluated as log2((1 + xi g1) / (1 + a xi g1)).
    C2 = log2(1 + a xi g2), MU-2 having removed MU-1's signal by SIC.

    :param xi: The linear transmit SNR.
    :param g_weak: The weak user's gains.
    :param g_strong: The strong user's gains.
    :param a: The fraction of the power given to the strong user.
    :return: The weak and strong user's capacities in bits/s/Hz.
    """
    y1 = xi * np.asarray(g_weak, dtype=float)
    y2 = xi * np.asarray(g_strong, dtype=float)
    alloc = np.asarray(a, dtype=float)
    c1 = _clamp((np.log1p(y1) - np.log1p(alloc * y1)) / LN2)
    c2 = _clamp(np.log1p(alloc * y2) / LN2)
    return _scalar_or_array(c1), _scalar_or_array(c2)


def allocation_bound(xi: float, g: float) -> float:
    """
    Get a(g) = ((1 + xi g)^(1/2) - 1) / (xi g).

    a(g_weak) is the largest allocation that is fair to the weak user and a(g_strong) the smallest that is fair to
    the strong user. a is strictly decreasing in g and lies in (0, 1/2).

    :param xi: The linear transmit SNR.
    :param g: A channel SNR gain.
    """
    if not (math.isfinite(xi) and xi > 0):
        raise DomainError(f"xi must be positive, got {xi}.")
    if not (math.isfinite(g) and g > 0):
        raise DomainError(f"The channel gain must be positive, got {g}.")
    return float(bound(xi * g))


def allocation_bound_slope(xi: float, g: float) -> float:
    """
    Get da/dg, which is negative for every positive gain.

    With s = sqrt(1 + xi g), a = 1 / (1 + s) and da/dg = -xi / (2 s (1 + s)^2).
    """
    if not (math.isfinite(xi) and xi > 0):
        raise DomainError(f"xi must be positive, got {xi}.")
    if not (math.isfinite(g) and g > 0):
        raise DomainError(f"The channel gain must be positive, got {g}.")
    s = math.sqrt(1.0 + xi * g)
    return -xi / (2.0 * s * (1.0 + s) ** 2)


def fair_region(params: SystemParams, pair: ChannelPair) -> FairRegion:
    """
    Get the Fair-NOMA power allocation region [a_inf, a_sup] of a channel pair.

    :param params: The system parameters.
    :param pair: The ordered channel pair.
    """
    a_inf = allocation_bound(params.xi, pair.g_strong)
    a_sup = allocation_bound(params.xi, pair.g_weak)
    return FairRegion(a_inf, a_sup)


def is_fair(params: SystemParams, pair: ChannelPair, a: ALLOCATION_TYPE) -> bool:
    """Whether both users do at least as well as with OMA at allocation `a`."""
    return fair_region(params, pair).contains(a)


def max_sum_allocation(params: SystemParams, pair: ChannelPair) -> float:
    """Get the fair allocation with the largest sum capacity, which is a_sup since the sum grows with a."""
    return fair_region(params, pair).a_sup


def oma_capacity(params: SystemParams, g: float) -> float:
    """
    Get the OMA capacity (1/2) log2(1 + xi g) of a user who has the channel half of the time.

    :param params: The system parameters.
    :param g: The user's channel SNR gain.
    """
    if not (g >= 0):
        raise DomainError(f"The channel gain must be non-negative, got {g}.")
    return float(oma_rate(params.xi, g))


def noma_capacities(params: SystemParams, pair: ChannelPair, a: ALLOCATION_TYPE) -> tuple[float, float]:
    """
    Get the NOMA capacities of both users.

    :param params: The system parameters.
    :param pair: The ordered channel pair. The strong user performs SIC.
    :param a: The fraction of the power given to the strong user.
    :return: C1^N(a) and C2^N(a) in bits/s/Hz.
    """
    alloc = as_allocation(a)
    c1, c2 = noma_rates(params.xi, pair.g_weak, pair.g_strong, alloc.a)
    return float(c1), float(c2)


def sic_margin(params: SystemParams, pair: ChannelPair, a: ALLOCATION_TYPE) -> float:
    """
    Get how much more clearly the strong user sees the weak user's signal than the weak user itself does.

    a xi g2 / ((1 - a) xi g2 + 1) - a xi g1 / ((1 - a) xi g1 + 1). Positive whenever g2 > g1, so SIC at MU-2 works.
    """
    alloc = as_allocation(a).a
    y1 = params.xi * pair.g_weak
    y2 = params.xi * pair.g_strong
    return alloc * y2 / ((1 - alloc) * y2 + 1) - alloc * y1 / ((1 - alloc) * y1 + 1)


def capacity_report(params: SystemParams, pair: ChannelPair, a: ALLOCATION_TYPE) -> CapacityReport:
    """
    Get all OMA and NOMA capacities of a channel pair at one allocation.

    :param params: The system parameters.
    :param pair: The ordered channel pair.
    :param a: The fraction of the power given to the strong user.
    """
    alloc = as_allocation(a)
    c1_noma, c2_noma = noma_capacities(params, pair, alloc)
    report = CapacityReport(c1_oma=oma_capacity(params, pair.g_weak),
                            c2_oma=oma_capacity(params, pair.g_strong),
                            c1_noma=c1_noma,
                            c2_noma=c2_noma,
                            a_used=alloc)
    logger.debug(f"Capacities for {pair} at a={alloc.a}: {report.as_dict()}")
    return report


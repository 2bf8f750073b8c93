"""Test the instantaneous capacities and the fair region."""
import math
import numpy as np
import pytest
from scipy import optimize
from channel_model import RandomStream, sample_pairs
from model import ChannelPair, DomainError, PowerAllocation, SystemParams
from noma_core import (allocation_bound, allocation_bound_slope, bound, capacity_report, fair_region, is_fair,
                       max_sum_allocation, noma_capacities, noma_rates, oma_capacity, oma_rate, sic_margin,
                       sqrt1pm1)


def test_allocation_bound_values() -> None:
    """Spot values and both limits of a(g)."""
    assert allocation_bound(10.0, 1.0) == pytest.approx((math.sqrt(11) - 1) / 10, rel=1e-14)
    assert allocation_bound(10.0, 1.0) == pytest.approx(0.2316625, abs=1e-7)
    assert 0.5 - 1e-7 <= allocation_bound(1.0, 1e-14) <= 0.5
    assert allocation_bound(1e6, 1.0) == pytest.approx(9.99e-4, rel=1e-3)


def test_allocation_bound_solves_the_fairness_equation(params_10db: SystemParams) -> None:
    """a(g_weak) is where the weak user's NOMA capacity drops to its OMA capacity."""
    pair = ChannelPair(1.0, 4.0)
    target = oma_capacity(params_10db, pair.g_weak)
    root = optimize.bisect(lambda a: noma_capacities(params_10db, pair, a)[0] - target, 1e-9, 1 - 1e-9, xtol=1e-15)
    assert allocation_bound(params_10db.xi, pair.g_weak) == pytest.approx(root, rel=1e-9)


def test_allocation_bound_is_decreasing() -> None:
    """a(x) is strictly decreasing and inside (0, 1/2)."""
    values = np.asarray(bound(np.logspace(-6, 6, 10_000)))
    assert np.all(np.diff(values) < 0)
    assert np.all((values > 0) & (values < 0.5))
    assert bound(0.0) == 0.5


def test_slope() -> None:
    """The closed-form slope is negative and matches a central difference."""
    for xi, g in ((1.0, 0.01), (10.0, 1.0), (1000.0, 3.0)):
        step = 1e-6 * g
        numeric = (allocation_bound(xi, g + step) - allocation_bound(xi, g - step)) / (2 * step)
        assert allocation_bound_slope(xi, g) < 0
        assert allocation_bound_slope(xi, g) == pytest.approx(numeric, rel=1e-6)


def test_sqrt1pm1() -> None:
    """sqrt(1 + y) - 1 keeps full precision for tiny y."""
    assert sqrt1pm1(1e-20) == pytest.approx(5e-21, rel=1e-15)
    assert sqrt1pm1(3.0) == pytest.approx(1.0, rel=1e-15)


def test_fair_region(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """The worked-example region, a degenerate region and automatic sorting."""
    region = fair_region(params_10db, pair_1_4)
    assert region.a_inf == pytest.approx((math.sqrt(41) - 1) / 40, rel=1e-14)
    assert region.a_inf == pytest.approx(0.135078, abs=1e-6)
    assert region.a_sup == pytest.approx(0.231662, abs=1e-6)
    assert fair_region(params_10db, ChannelPair(4.0, 1.0)) == region

    point = fair_region(SystemParams(1.0), ChannelPair(1.0, 1.0))
    assert point.a_inf == point.a_sup == pytest.approx(math.sqrt(2) - 1, rel=1e-14)
    assert point.width == 0.0


def test_membership(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """is_fair follows the region and the sum-maximising fair allocation is a_sup."""
    region = fair_region(params_10db, pair_1_4)
    assert is_fair(params_10db, pair_1_4, region.midpoint)
    assert is_fair(params_10db, pair_1_4, PowerAllocation(region.a_sup))
    assert not is_fair(params_10db, pair_1_4, 0.1)
    assert not is_fair(params_10db, pair_1_4, 0.3)
    assert max_sum_allocation(params_10db, pair_1_4) == region.a_sup


def test_oma_capacity(unit_params: SystemParams) -> None:
    """(1/2) log2(1 + xi g)."""
    assert oma_capacity(unit_params, 0.0) == 0.0
    assert oma_capacity(unit_params, 3.0) == pytest.approx(1.0, rel=1e-15)
    assert oma_capacity(SystemParams(1000.0), 1.0) == pytest.approx(0.5 * math.log2(1001), rel=1e-14)
    assert oma_capacity(SystemParams(1000.0), 1.0) == pytest.approx(4.983613, abs=1e-6)
    with pytest.raises(DomainError):
        oma_capacity(unit_params, -1.0)


def test_boundary_identities(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """At a_sup the weak user gets its OMA capacity and at a_inf the strong user does."""
    region = fair_region(params_10db, pair_1_4)
    c1, _ = noma_capacities(params_10db, pair_1_4, region.a_sup)
    _, c2 = noma_capacities(params_10db, pair_1_4, region.a_inf)
    assert c1 == pytest.approx(0.5 * math.log2(11), rel=1e-12)
    assert c1 == pytest.approx(1.72972, abs=1e-5)
    assert c2 == pytest.approx(0.5 * math.log2(41), rel=1e-12)

    report = capacity_report(params_10db, pair_1_4, region.a_sup)
    assert report.c1_noma == pytest.approx(report.c1_oma, rel=1e-12)
    report = capacity_report(params_10db, pair_1_4, region.a_inf)
    assert report.c2_noma == pytest.approx(report.c2_oma, rel=1e-12)


def test_boundary_identities_on_random_pairs() -> None:
    """The identities hold pair by pair across SNRs."""
    for snr_db in (0.0, 10.0, 30.0):
        xi = 10 ** (snr_db / 10)
        weak, strong = sample_pairs(SystemParams(xi), RandomStream(99), 10_000)
        c1, _ = noma_rates(xi, weak, strong, bound(xi * weak))
        _, c2 = noma_rates(xi, weak, strong, bound(xi * strong))
        assert np.allclose(c1, oma_rate(xi, weak), rtol=1e-12, atol=0)
        assert np.allclose(c2, oma_rate(xi, strong), rtol=1e-12, atol=0)


def test_fairness_inside_the_region(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """Strictly inside the region both users gain and so does the sum."""
    region = fair_region(params_10db, pair_1_4)
    for t in np.linspace(0.05, 0.95, 19):
        report = capacity_report(params_10db, pair_1_4, region.interpolate(float(t)))
        assert report.c1_noma > report.c1_oma
        assert report.c2_noma > report.c2_oma
        assert report.sum_noma > report.sum_oma
        assert report.fair_to_weak_user and report.fair_to_strong_user


@pytest.mark.parametrize("snr_db", [0.0, 10.0, 30.0])
def test_fairness_on_random_pairs(snr_db: float) -> None:
    """Ten random allocations in each of ten thousand pairs' regions: nobody loses and the sum strictly grows."""
    xi = 10 ** (snr_db / 10)
    weak, strong = sample_pairs(SystemParams(xi), RandomStream(7), 10_000)
    a_inf = np.asarray(bound(xi * strong))
    a_sup = np.asarray(bound(xi * weak))
    c1_oma = np.asarray(oma_rate(xi, weak))
    c2_oma = np.asarray(oma_rate(xi, strong))
    for fraction in RandomStream(7, 1).rng.random((10, weak.size)):
        c1, c2 = noma_rates(xi, weak, strong, a_inf + fraction * (a_sup - a_inf))
        assert np.all(c1 - c1_oma >= -1e-12)
        assert np.all(c2 - c2_oma >= -1e-12)
        assert np.all(c1 + c2 > c1_oma + c2_oma)


def test_sum_capacity_grows_with_a(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """S_N(a) is increasing in a for distinct gains."""
    sums = [sum(noma_capacities(params_10db, pair_1_4, float(a))) for a in np.linspace(0.01, 0.99, 99)]
    assert all(later > earlier for earlier, later in zip(sums, sums[1:]))


def test_extreme_allocations(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """Nearly all power to one user."""
    c1, c2 = noma_capacities(params_10db, pair_1_4, 1 - 1e-12)
    assert c1 == pytest.approx(0.0, abs=1e-10)
    assert c2 == pytest.approx(math.log2(41), rel=1e-10)
    c1, c2 = noma_capacities(params_10db, pair_1_4, 1e-12)
    assert c1 == pytest.approx(math.log2(11), rel=1e-10)
    assert c2 == pytest.approx(0.0, abs=1e-10)


def test_sic_margin(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """The strong user decodes the weak user's signal at least as well as the weak user."""
    assert sic_margin(params_10db, pair_1_4, 0.2) > 0
    assert sic_margin(params_10db, ChannelPair(2.0, 2.0), 0.2) == 0.0
    assert abs(sic_margin(params_10db, pair_1_4, 1e-12)) < 1e-10


def test_domain_errors(params_10db: SystemParams, pair_1_4: ChannelPair) -> None:
    """Invalid allocations and gains are rejected."""
    with pytest.raises(DomainError):
        noma_capacities(params_10db, pair_1_4, 1.0)
    with pytest.raises(DomainError):
        noma_capacities(params_10db, pair_1_4, 0.0)
    with pytest.raises(DomainError):
        allocation_bound(10.0, 0.0)
    with pytest.raises(DomainError):
        allocation_bound(-1.0, 1.0)
    with pytest.raises(DomainError):
        ChannelPair(0.0, 1.0)

"""Test the Monte Carlo engine."""
import numpy as np
import pytest
import monte_carlo
from ergodic_analysis import ergodic_c1_noma_at_a_inf, ergodic_c1_oma, ergodic_c2_oma, ergodic_sum_oma
from model import DomainError, PolicyKind, Quantity, SystemParams
from monte_carlo import AllocationPolicy, McConfig, estimate, estimate_many, merge_moments, paired_gap, region_markers

SEED = 20160101


@pytest.mark.timeout(120, method="thread")
def test_sum_oma_matches_closed_form(unit_params: SystemParams) -> None:
    """Ten million pairs land within three standard errors of the closed form."""
    result = estimate(unit_params, AllocationPolicy(), Quantity.SUM_OMA, 10_000_000, SEED)
    assert result.n_samples == 10_000_000
    assert result.within(0.8603474)
    assert result.within(ergodic_sum_oma(unit_params).value)


def test_oma_means_match_closed_forms(params_10db: SystemParams, small_blocks: McConfig) -> None:
    """Both per-user OMA expectations."""
    results = estimate_many(params_10db, AllocationPolicy(), [Quantity.C1_OMA, Quantity.C2_OMA], 400_000, SEED,
                            small_blocks)
    assert results[Quantity.C1_OMA].within(ergodic_c1_oma(params_10db).value)
    assert results[Quantity.C2_OMA].within(ergodic_c2_oma(params_10db).value)


def test_quadrature_matches_monte_carlo(params_10db: SystemParams) -> None:
    """The weak user's expected capacity at a_inf."""
    result = estimate(params_10db, AllocationPolicy(PolicyKind.AT_INF), Quantity.C1_NOMA, 400_000, SEED)
    assert result.within(ergodic_c1_noma_at_a_inf(params_10db).value, floor=2e-3)


def test_boundary_identity_per_sample(params_10db: SystemParams) -> None:
    """At a_sup the weak user's NOMA capacity is its OMA capacity on every sample."""
    results = estimate_many(params_10db, AllocationPolicy(PolicyKind.AT_SUP), [Quantity.C1_NOMA, Quantity.C1_OMA],
                            100_000, SEED)
    assert results[Quantity.C1_NOMA].mean == pytest.approx(results[Quantity.C1_OMA].mean, rel=1e-12)
    assert results[Quantity.C1_NOMA].std_error == pytest.approx(results[Quantity.C1_OMA].std_error, rel=1e-9)


def test_midpoint_beats_oma() -> None:
    """The sum capacity at the middle of each region beats OMA on the same pairs."""
    params = SystemParams.from_db(30.0)
    results = estimate_many(params, AllocationPolicy(PolicyKind.MIDPOINT), [Quantity.SUM_NOMA, Quantity.SUM_OMA],
                            100_000, SEED)
    assert results[Quantity.SUM_NOMA].mean > results[Quantity.SUM_OMA].mean
    assert estimate(params, AllocationPolicy(PolicyKind.MIDPOINT), Quantity.SUM_NOMA, 100_000, SEED).mean \
        == results[Quantity.SUM_NOMA].mean


def test_paired_gap(params_10db: SystemParams) -> None:
    """The gap is positive for every region-relative policy and larger at higher SNR."""
    for kind in (PolicyKind.AT_INF, PolicyKind.MIDPOINT, PolicyKind.AT_SUP):
        low = paired_gap(params_10db, AllocationPolicy(kind), 100_000, SEED)
        high = paired_gap(SystemParams.from_db(40.0), AllocationPolicy(kind), 100_000, SEED)
        assert low.mean > 0
        assert high.mean > low.mean


def test_equal_gains_close_the_gap(params_10db: SystemParams) -> None:
    """With both users on the same channel the region is a point and NOMA equals OMA."""
    gap = paired_gap(params_10db, AllocationPolicy(PolicyKind.AT_INF), 50_000, SEED, McConfig(tie_gains=True))
    assert gap.mean == pytest.approx(0.0, abs=1e-12)


def test_reproducible_and_worker_invariant(params_10db: SystemParams, small_blocks: McConfig) -> None:
    """The same seed gives the same numbers bit for bit, however many processes do the work."""
    policy = AllocationPolicy.fixed(0.3)
    quantities = [Quantity.C1_NOMA, Quantity.C2_NOMA, Quantity.SUM_GAP]
    serial = estimate_many(params_10db, policy, quantities, 50_000, SEED, small_blocks)
    again = estimate_many(params_10db, policy, quantities, 50_000, SEED, small_blocks)
    parallel = estimate_many(params_10db, policy, quantities, 50_000, SEED, McConfig(block_size=8192, workers=3))
    assert serial == again == parallel
    other_seed = estimate_many(params_10db, policy, quantities, 50_000, SEED + 1, small_blocks)
    assert other_seed[Quantity.C1_NOMA].mean != serial[Quantity.C1_NOMA].mean


def test_region_markers() -> None:
    """E[a_inf] < E[a_sup] < 1/2."""
    a_inf, a_sup = region_markers(SystemParams.from_db(30.0), 50_000, SEED)
    assert 0 < a_inf.mean < a_sup.mean < 0.5


def test_merge_moments() -> None:
    """Merging block moments gives the moments of all samples."""
    values = np.random.default_rng(3).random(1000)
    left, right = values[:300], values[300:]
    moments = [(part.size, float(np.mean(part)), float(np.sum((part - np.mean(part)) ** 2))) for part in (left, right)]
    count, mean, m2 = merge_moments(moments[0], moments[1])
    assert count == 1000
    assert mean == pytest.approx(float(np.mean(values)), rel=1e-14)
    assert m2 == pytest.approx(float(np.sum((values - np.mean(values)) ** 2)), rel=1e-12)


def test_single_sample(params_10db: SystemParams) -> None:
    """One sample has no spread estimate."""
    result = estimate(params_10db, AllocationPolicy(), Quantity.C1_OMA, 1, SEED)
    assert result.n_samples == 1
    assert result.std_error == 0.0


def test_policies(params_10db: SystemParams) -> None:
    """Region-relative policies follow each pair's own region."""
    weak = np.array([0.5, 1.0])
    strong = np.array([2.0, 4.0])
    at_inf = AllocationPolicy(PolicyKind.AT_INF).allocations(params_10db.xi, weak, strong)
    at_sup = AllocationPolicy(PolicyKind.AT_SUP).allocations(params_10db.xi, weak, strong)
    middle = AllocationPolicy(PolicyKind.MIDPOINT).allocations(params_10db.xi, weak, strong)
    assert np.all(at_inf < middle) and np.all(middle < at_sup)
    assert np.allclose(AllocationPolicy.fixed(0.25).allocations(params_10db.xi, weak, strong), 0.25)
    assert AllocationPolicy.fixed(0.25).label == "fixed=0.25"
    assert AllocationPolicy(PolicyKind.AT_SUP).label == "at-sup"


def test_domain_errors(params_10db: SystemParams) -> None:
    """Bad policies, statistics, sample counts and seeds are rejected."""
    with pytest.raises(DomainError):
        AllocationPolicy(PolicyKind.FIXED)
    with pytest.raises(DomainError):
        AllocationPolicy.fixed(1.5)
    with pytest.raises(DomainError):
        estimate(params_10db, AllocationPolicy(), Quantity.SUM_GAP, 100, SEED)
    with pytest.raises(DomainError):
        estimate(params_10db, AllocationPolicy(), Quantity.C1_OMA, 0, SEED)
    with pytest.raises(DomainError):
        estimate(params_10db, AllocationPolicy(), Quantity.C1_OMA, 100, -1)
    with pytest.raises(DomainError):
        monte_carlo.McConfig(workers=0)

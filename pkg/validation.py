"""
Cross-method checks of the whole library.

Each check compares two independent ways of getting the same number (closed form against Monte Carlo, a single
integral against the double integral it came from, E1 against direct quadrature, ...) or asserts a property the
capacities must have. `run_checks` runs them all and `all_passed` decides the exit code of `fair-noma.py validate`.
"""
from __future__ import annotations
import logging
import math
import numpy as np
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Optional
from scipy import integrate
import ergodic_analysis
import monte_carlo
from channel_model import RandomStream, sample_pairs
from ergodic_analysis import QuadratureConfig
from model import ConvergenceError, PolicyKind, Quantity, SystemParams
from monte_carlo import AllocationPolicy, McConfig
from noma_core import bound, noma_rates, oma_rate
from special_functions import PrecisionBudget, exp_integral_e1, exp_scaled_e1
from timer import Timer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationSettings:
    """Where and how hard the checks run."""

    params: SystemParams = field(default_factory=lambda: SystemParams.from_db(10.0))
    samples: int = 10_000_000
    seed: int = 20160101
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    monte_carlo: McConfig = field(default_factory=McConfig)
    precision: PrecisionBudget = field(default_factory=PrecisionBudget)
    property_pairs: int = 10_000


@dataclass(frozen=True)
class Check:
    """The outcome of one comparison."""

    name: str
    reference: Optional[float]
    """None when the check could not be computed."""
    estimate: Optional[float]
    tolerance: float
    passed: bool
    std_error: Optional[float] = None

    @property
    def delta(self) -> Optional[float]:
        """estimate - reference."""
        if self.estimate is None or self.reference is None:
            return None
        return self.estimate - self.reference

    def as_dict(self) -> dict[str, object]:
        """Get the check as plain values."""
        return {"name": self.name, "reference": self.reference, "estimate": self.estimate, "delta": self.delta,
                "tolerance": self.tolerance, "std_error": self.std_error, "passed": self.passed}


def compare(name: str, reference: float, estimate: float, tolerance: float,
            std_error: Optional[float] = None) -> Check:
    """Build a check that passes when |estimate - reference| <= tolerance."""
    passed = math.isfinite(estimate) and abs(estimate - reference) <= tolerance
    return Check(name, reference, estimate, tolerance, passed, std_error)


def check_e1(settings: ValidationSettings) -> list[Check]:
    """E1 against direct quadrature of its defining integral, and the standard enclosure on a log grid."""
    checks = []
    for x in (0.5, 1.0, 2.0, 5.0):
        oracle, _ = integrate.quad(lambda u: math.exp(-u) / u, x, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
        value = exp_integral_e1(x, settings.precision)
        checks.append(compare(f"e1 vs quadrature at x={x:g}", oracle, value, 1e-10 * oracle))

    worst = math.inf
    for x in np.logspace(-6, 3, 400):
        scaled = exp_scaled_e1(float(x), settings.precision)
        lower = 0.5 * math.log1p(2.0 / x)
        upper = math.log1p(1.0 / x)
        worst = min(worst, scaled - lower, upper - scaled)
    checks.append(Check("e1 enclosure margin", 0.0, worst, 0.0, worst > 0))
    return checks


def _property_pairs(settings: ValidationSettings, stream_id: int) -> tuple[np.ndarray, np.ndarray]:
    return sample_pairs(settings.params, RandomStream(settings.seed, stream_id), settings.property_pairs)


def check_boundary_identities(settings: ValidationSettings) -> list[Check]:
    """C1^N(a_sup) = C1^O and C2^N(a_inf) = C2^O on random pairs at 0, 10 and 30 dB."""
    g_weak, g_strong = _property_pairs(settings, 1)
    checks = []
    for snr_db in (0.0, 10.0, 30.0):
        xi = 10 ** (snr_db / 10)
        c1_oma = np.asarray(oma_rate(xi, g_weak))
        c2_oma = np.asarray(oma_rate(xi, g_strong))
        c1_sup, _ = noma_rates(xi, g_weak, g_strong, bound(xi * g_weak))
        _, c2_inf = noma_rates(xi, g_weak, g_strong, bound(xi * g_strong))
        worst = max(float(np.max(np.abs(c1_sup - c1_oma) / c1_oma)), float(np.max(np.abs(c2_inf - c2_oma) / c2_oma)))
        checks.append(Check(f"boundary identities at {snr_db:g} dB (max rel. error)", 0.0, worst, 1e-12,
                            worst <= 1e-12))
    return checks


def check_allocation_bound(settings: ValidationSettings) -> list[Check]:
    """a(x) is strictly decreasing and inside (0, 1/2) on a log grid."""
    checks = []
    grid = np.logspace(-6, 6, 10_000)
    for xi in (1.0, 100.0):
        values = np.asarray(bound(xi * grid))
        steps = np.diff(values)
        passed = bool(np.all(steps < 0) and np.all(values > 0) and np.all(values < 0.5))
        checks.append(Check(f"a(x) decreasing in (0, 1/2) at xi={xi:g} (largest step)", 0.0, float(np.max(steps)),
                            0.0, passed))
    return checks


def check_fairness(settings: ValidationSettings) -> list[Check]:
    """Every allocation inside each pair's fair region helps both users and strictly raises the sum."""
    g_weak, g_strong = _property_pairs(settings, 2)
    xi = settings.params.xi
    fractions = RandomStream(settings.seed, 3).rng.random((10, g_weak.size))
    a_inf = np.asarray(bound(xi * g_strong))
    a_sup = np.asarray(bound(xi * g_weak))
    c1_oma = np.asarray(oma_rate(xi, g_weak))
    c2_oma = np.asarray(oma_rate(xi, g_strong))
    worst_user = math.inf
    worst_sum = math.inf
    for row in fractions:
        c1, c2 = noma_rates(xi, g_weak, g_strong, a_inf + row * (a_sup - a_inf))
        worst_user = min(worst_user, float(np.min(c1 - c1_oma)), float(np.min(c2 - c2_oma)))
        worst_sum = min(worst_sum, float(np.min((c1 + c2) - (c1_oma + c2_oma))))
    return [Check("fairness: min per-user gain", 0.0, worst_user, 1e-12, worst_user >= -1e-12),
            Check("fairness: min sum gain", 0.0, worst_sum, 0.0, worst_sum > 0)]


def check_closed_forms(settings: ValidationSettings) -> list[Check]:
    """The three OMA closed forms against Monte Carlo."""
    params = settings.params
    results = monte_carlo.estimate_many(params, AllocationPolicy(), [Quantity.C1_OMA, Quantity.C2_OMA, Quantity.SUM_OMA],
                                        settings.samples, settings.seed, settings.monte_carlo)
    references = {Quantity.C1_OMA: ergodic_analysis.ergodic_c1_oma(params),
                  Quantity.C2_OMA: ergodic_analysis.ergodic_c2_oma(params),
                  Quantity.SUM_OMA: ergodic_analysis.ergodic_sum_oma(params)}
    return [compare(f"E[{quantity.value}] closed form vs monte carlo", reference.value, results[quantity].mean,
                    3 * results[quantity].std_error, results[quantity].std_error)
            for quantity, reference in references.items()]


def check_reductions(settings: ValidationSettings) -> list[Check]:
    """The single-integral reductions against the double integrals and against Monte Carlo."""
    params = settings.params
    weak = ergodic_analysis.ergodic_c1_noma_at_a_inf(params, settings.quadrature)
    strong = ergodic_analysis.ergodic_c2_noma_at_a_sup(params, settings.quadrature)
    weak_2d = ergodic_analysis.ergodic_c1_noma_at_a_inf_direct(params, settings.quadrature)
    strong_2d = ergodic_analysis.ergodic_c2_noma_at_a_sup_direct(params, settings.quadrature)
    at_inf = monte_carlo.estimate(params, AllocationPolicy(PolicyKind.AT_INF), Quantity.C1_NOMA, settings.samples,
                                  settings.seed, settings.monte_carlo)
    at_sup = monte_carlo.estimate(params, AllocationPolicy(PolicyKind.AT_SUP), Quantity.C2_NOMA, settings.samples,
                                  settings.seed, settings.monte_carlo)
    return [compare("E[c1_noma(a_inf)] single vs double integral", weak_2d.value, weak.value, 1e-4),
            compare("E[c2_noma(a_sup)] single vs double integral", strong_2d.value, strong.value, 1e-4),
            compare("E[c1_noma(a_inf)] quadrature vs monte carlo", weak.value, at_inf.mean,
                    max(3 * at_inf.std_error, 2e-3), at_inf.std_error),
            compare("E[c2_noma(a_sup)] quadrature vs monte carlo", strong.value, at_sup.mean,
                    max(3 * at_sup.std_error, 2e-3), at_sup.std_error)]


def check_boundary_expectations(settings: ValidationSettings) -> list[Check]:
    """The user held at its OMA capacity on a region edge has the OMA ergodic capacity."""
    params = settings.params
    at_sup = monte_carlo.estimate(params, AllocationPolicy(PolicyKind.AT_SUP), Quantity.C1_NOMA, settings.samples,
                                  settings.seed, settings.monte_carlo)
    at_inf = monte_carlo.estimate(params, AllocationPolicy(PolicyKind.AT_INF), Quantity.C2_NOMA, settings.samples,
                                  settings.seed, settings.monte_carlo)
    return [compare("E[c1_noma(a_sup)] monte carlo vs E[c1_oma]", ergodic_analysis.ergodic_c1_oma(params).value,
                    at_sup.mean, 3 * at_sup.std_error, at_sup.std_error),
            compare("E[c2_noma(a_inf)] monte carlo vs E[c2_oma]", ergodic_analysis.ergodic_c2_oma(params).value,
                    at_inf.mean, 3 * at_inf.std_error, at_inf.std_error)]


def _edge_gap(params: SystemParams, config: QuadratureConfig) -> tuple[float, float]:
    """The gain at a_sup minus the gain at a_inf, and that difference relative to the larger gain."""
    at_inf = ergodic_analysis.ergodic_gain_at_a_inf(params, config).value
    at_sup = ergodic_analysis.ergodic_gain_at_a_sup(params, config).value
    return at_sup - at_inf, abs(at_sup - at_inf) / max(at_sup, at_inf)


def check_gain_ordering(settings: ValidationSettings) -> list[Check]:
    """At 0 dB the strong user gains more, and the two edge gains draw together as the SNR grows."""
    beta = settings.params.beta
    snrs_db = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
    gaps = {snr_db: _edge_gap(SystemParams.from_db(snr_db, beta), settings.quadrature) for snr_db in snrs_db}
    low_difference, _ = gaps[0.0]
    relative = [gaps[snr_db][1] for snr_db in snrs_db]
    worst_step = max(later - earlier for earlier, later in zip(relative, relative[1:]))
    return [Check("gain at a_sup minus gain at a_inf at 0 dB", 0.0, low_difference, 0.0, low_difference > 0),
            Check("relative gap between edge gains, largest step from 0 to 60 dB", 0.0, worst_step, 0.0,
                  worst_step < 0),
            Check("relative gap between edge gains at 40 dB", 0.0, gaps[40.0][1], 0.10, gaps[40.0][1] < 0.10)]


def check_sum_gap(settings: ValidationSettings) -> list[Check]:
    """The paired sum-capacity gap is positive at every SNR and grows from 10 dB to 40 dB."""
    beta = settings.params.beta
    samples = min(settings.samples, 1_000_000)
    checks = []
    for kind in (PolicyKind.AT_INF, PolicyKind.MIDPOINT, PolicyKind.AT_SUP):
        gaps = {}
        for snr_db in (0.0, 10.0, 20.0, 30.0, 40.0):
            gap = monte_carlo.paired_gap(SystemParams.from_db(snr_db, beta), AllocationPolicy(kind), samples,
                                         settings.seed, settings.monte_carlo)
            gaps[snr_db] = gap
            checks.append(Check(f"sum gap with {kind.value} at {snr_db:g} dB", 0.0, gap.mean, 0.0, gap.mean > 0,
                                gap.std_error))
        checks.append(Check(f"sum gap with {kind.value}: 40 dB minus 10 dB", 0.0, gaps[40.0].mean - gaps[10.0].mean,
                            0.0, gaps[40.0].mean > gaps[10.0].mean))
    return checks


def check_saturation(settings: ValidationSettings) -> list[Check]:
    """At 30 dB the expected sum capacity grows with a and is nearly flat beyond E[a_inf]."""
    params = SystemParams.from_db(30.0, settings.params.beta)
    samples = min(settings.samples, 1_000_000)
    a_inf_marker, _ = monte_carlo.region_markers(params, samples, settings.seed, settings.monte_carlo)
    grid = sorted(set(np.round(np.linspace(0.02, 0.98, 49), 6).tolist()) | {a_inf_marker.mean, 0.4})
    sums = {a: monte_carlo.estimate(params, AllocationPolicy.fixed(a), Quantity.SUM_NOMA, samples, settings.seed,
                                    settings.monte_carlo).mean
            for a in grid}
    values = [sums[a] for a in grid]
    worst_step = min(later - earlier for earlier, later in zip(values, values[1:]))
    excess = sums[0.4] / sums[a_inf_marker.mean] - 1.0
    return [Check("E[sum_noma(a)] smallest step over the a grid", 0.0, worst_step, 0.0, worst_step >= 0),
            Check("E[sum_noma(0.4)] over E[sum_noma(E[a_inf])] minus 1", 0.0, excess, 0.05, 0 <= excess < 0.05)]


CHECKS: list[tuple[Callable[[ValidationSettings], list[Check]], float]] = [
    (check_e1, 1.0),
    (check_boundary_identities, 1.0),
    (check_allocation_bound, 1.0),
    (check_fairness, 5.0),
    (check_closed_forms, 30.0),
    (check_reductions, 60.0),
    (check_boundary_expectations, 30.0),
    (check_gain_ordering, 60.0),
    (check_sum_gap, 120.0),
    (check_saturation, 120.0),
]
"""Each check with its run-time budget in seconds."""


def run_checks(settings: ValidationSettings) -> list[Check]:
    """
    Run every check.

    A check that raises `ConvergenceError` is recorded as failed instead of stopping the run.

    :param settings: Where and how hard the checks run.
    :return: The outcome of every comparison.
    """
    results = []
    for check, budget in CHECKS:
        timer = Timer(budget)
        name = check.__name__
        try:
            outcomes = check(settings)
        except ConvergenceError as error:
            logger.error(f"{name} failed to converge: {error}")
            outcomes = [Check(name, None, None, 0.0, False)]
        if timer.is_over_budget():
            logger.warning(f"{name} took {timer.time_since_reset():.1f} s, more than its {budget:g} s budget.")
        else:
            logger.debug(f"{name} took {timer.time_since_reset():.2f} s.")
        results.extend(outcomes)
    return results


def all_passed(checks: list[Check]) -> bool:
    """Whether every check passed."""
    return all(check.passed for check in checks)

"""
Ergodic (expected) capacities over i.i.d. Rayleigh channel pairs.

OMA capacities have closed forms in the exponential integral. The NOMA capacities at the edges of the fair region
reduce to a closed term plus one integral over [0, infinity), evaluated here with adaptive Gauss-Kronrod quadrature.
"""
from __future__ import annotations
import logging
import math
import warnings
from dataclasses import dataclass
from collections.abc import Callable
from scipy import integrate
from model import ConvergenceError, DomainError, ErgodicEstimate, Method, SystemParams
from noma_core import LN2, sqrt1pm1
from special_functions import exp_scaled_e1

logger = logging.getLogger(__name__)

LN4 = math.log(4.0)
INTEGRAND_TYPE = Callable[[float], float]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances of the adaptive quadrature and where the semi-infinite integrals are truncated."""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    truncation_multiplier: float = 60.0
    """The integrals are truncated at x = truncation_multiplier * beta."""
    limit: int = 200
    """The maximum number of subintervals."""

    def __post_init__(self) -> None:
        """Check the tolerances and the truncation point."""
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError(f"Quadrature tolerances must be positive, got {self.abs_tol} and {self.rel_tol}.")
        if self.truncation_multiplier < 30:
            raise DomainError(f"truncation_multiplier must be at least 30, got {self.truncation_multiplier}.")
        if self.limit < 1:
            raise DomainError(f"The subdivision limit must be positive, got {self.limit}.")


DEFAULT_QUADRATURE = QuadratureConfig()


def _scaled(c: float) -> float:
    """e^c E1(c) for the argument c = k / (beta xi) that appears in all closed forms."""
    return exp_scaled_e1(c)


def ergodic_c1_oma(params: SystemParams) -> ErgodicEstimate:
    """E[C1^O] = e^(2/(beta xi)) E1(2/(beta xi)) / ln(4)."""
    return ErgodicEstimate(_scaled(2.0 / params.mean_snr) / LN4, Method.CLOSED_FORM)


def ergodic_sum_oma(params: SystemParams) -> ErgodicEstimate:
    """E[S_O] = e^(1/(beta xi)) E1(1/(beta xi)) / ln(2)."""
    return ErgodicEstimate(_scaled(1.0 / params.mean_snr) / LN2, Method.CLOSED_FORM)


def ergodic_c2_oma(params: SystemParams) -> ErgodicEstimate:
    """E[C2^O] = e^(1/(beta xi)) E1(1/(beta xi)) / ln(2) - e^(2/(beta xi)) E1(2/(beta xi)) / ln(4)."""
    total = ergodic_sum_oma(params).value
    weak = ergodic_c1_oma(params).value
    return ErgodicEstimate(total - weak, Method.CLOSED_FORM)


def _edge_arguments(params: SystemParams, x: float) -> tuple[float, float]:
    """
    Get the two E1 arguments of the single-integral reductions.

    With s = sqrt(1 + xi x), x / (beta (s - 1)) = (1 + s) / (beta xi) and x s / (beta (s - 1)) is s times that.
    Written this way neither needs the division by s - 1, which vanishes at x = 0.
    """
    s_minus_one = float(sqrt1pm1(params.xi * x))
    near = (2.0 + s_minus_one) / params.mean_snr
    return near, (1.0 + s_minus_one) * near


def a_inf_integrand(params: SystemParams, x: float) -> float:
    """
    Get the integrand subtracted in E[C1^N(a_inf)].

    (2 / (beta ln 2)) exp(-(x/beta)(s - 2)/(s - 1)) [E1(B1) - E1(B2)], rewritten with F(B) = e^B E1(B) as
    (2 / (beta ln 2)) [e^(-x/beta) F(B1) - e^(-2x/beta) F(B2)] so that nothing overflows.
    It is 0 at x = 0, where B1 = B2 = 2 / (beta xi).
    """
    near, far = _edge_arguments(params, x)
    decay = math.exp(-x / params.beta)
    return 2.0 / (params.beta * LN2) * (decay * exp_scaled_e1(near) - decay * decay * exp_scaled_e1(far))


def a_sup_integrand(params: SystemParams, x: float) -> float:
    """
    Get the integrand added in E[C2^N(a_sup)].

    (2 / (beta ln 2)) exp(-(x/beta)(s - 2)/(s - 1)) E1(B2) = (2 / (beta ln 2)) e^(-2x/beta) F(B2).
    """
    _, far = _edge_arguments(params, x)
    return 2.0 / (params.beta * LN2) * math.exp(-2.0 * x / params.beta) * exp_scaled_e1(far)


def _integrate(integrand: INTEGRAND_TYPE, params: SystemParams, config: QuadratureConfig) -> tuple[float, float]:
    """
    Integrate over [0, truncation_multiplier * beta].

    A breakpoint is put at x = 3 / xi, where the exponent of the published integrands changes sign.

    :return: The integral and QUADPACK's error estimate.
    """
    upper = config.truncation_multiplier * params.beta
    turning_point = 3.0 / params.xi
    points = [turning_point] if 0 < turning_point < upper else None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, error = integrate.quad(integrand, 0.0, upper, epsabs=config.abs_tol, epsrel=config.rel_tol,
                                          limit=config.limit, points=points)
        except integrate.IntegrationWarning as warning:
            raise ConvergenceError(f"Quadrature failed at xi={params.xi}, beta={params.beta}: {warning}") from warning
    if not (math.isfinite(value) and math.isfinite(error)):
        raise ConvergenceError(f"Quadrature returned {value} ± {error} at xi={params.xi}, beta={params.beta}.")
    logger.debug(f"Quadrature of {getattr(integrand, '__name__', 'integrand')} on [0, {upper}]: {value} ± {error}")
    return value, error


def _tail_bound(params: SystemParams, config: QuadratureConfig, rate: float) -> float:
    """
    Bound the part of an integral beyond the truncation point T.

    Both integrands are at most (2 / (beta ln 2)) e^(-rate x / beta) ln(1 + 1/B1(T)) there, because F(B) < ln(1 + 1/B)
    and B1 grows with x. Integrating the majorant from T to infinity gives the bound.
    """
    upper = config.truncation_multiplier * params.beta
    near, _ = _edge_arguments(params, upper)
    return 2.0 / (rate * LN2) * math.log1p(1.0 / near) * math.exp(-rate * upper / params.beta)


def ergodic_c1_noma_at_a_inf(params: SystemParams, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """
    Get E[C1^N(a_inf)], the weak user's expected capacity at the smallest fair allocation.

    3 e^(2/(beta xi)) E1(2/(beta xi)) / ln(4) minus the integral of `a_inf_integrand`.

    :param params: The system parameters.
    :param config: The quadrature settings.
    """
    closed = 3.0 * _scaled(2.0 / params.mean_snr) / LN4
    integral, error = _integrate(lambda x: a_inf_integrand(params, x), params, config)
    bound_error = error + _tail_bound(params, config, 1.0)
    return ErgodicEstimate(max(closed - integral, 0.0), Method.QUADRATURE, bound_error)


def ergodic_c2_noma_at_a_sup(params: SystemParams, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """
    Get E[C2^N(a_sup)], the strong user's expected capacity at the largest fair allocation.

    e^(2/(beta xi)) E1(2/(beta xi)) / ln(4) plus the integral of `a_sup_integrand`.

    :param params: The system parameters.
    :param config: The quadrature settings.
    """
    closed = _scaled(2.0 / params.mean_snr) / LN4
    integral, error = _integrate(lambda x: a_sup_integrand(params, x), params, config)
    bound_error = error + _tail_bound(params, config, 2.0)
    return ErgodicEstimate(closed + integral, Method.QUADRATURE, bound_error)


def ergodic_sum_noma_at_a_inf(params: SystemParams, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """E[S_N(a_inf)] = E[C1^N(a_inf)] + E[C2^O], since the strong user gets exactly its OMA capacity at a_inf."""
    weak = ergodic_c1_noma_at_a_inf(params, config)
    return ErgodicEstimate(weak.value + ergodic_c2_oma(params).value, Method.QUADRATURE, weak.error_bound)


def ergodic_sum_noma_at_a_sup(params: SystemParams, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """E[S_N(a_sup)] = E[C1^O] + E[C2^N(a_sup)], since the weak user gets exactly its OMA capacity at a_sup."""
    strong = ergodic_c2_noma_at_a_sup(params, config)
    return ErgodicEstimate(ergodic_c1_oma(params).value + strong.value, Method.QUADRATURE, strong.error_bound)


def ergodic_gain_at_a_inf(params: SystemParams, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """The expected capacity increase over OMA at a_inf. Only the weak user gains there."""
    weak = ergodic_c1_noma_at_a_inf(params, config)
    return ErgodicEstimate(max(weak.value - ergodic_c1_oma(params).value, 0.0), Method.QUADRATURE, weak.error_bound)


def ergodic_gain_at_a_sup(params: SystemParams, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """The expected capacity increase over OMA at a_sup. Only the strong user gains there."""
    strong = ergodic_c2_noma_at_a_sup(params, config)
    return ErgodicEstimate(max(strong.value - ergodic_c2_oma(params).value, 0.0), Method.QUADRATURE,
                           strong.error_bound)


def _integrate_2d(integrand: Callable[[float, float], float], outer: tuple[float, float],
                  inner: tuple[Callable[[float], float], Callable[[float], float]],
                  params: SystemParams, config: QuadratureConfig) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, error = integrate.dblquad(integrand, outer[0], outer[1], inner[0], inner[1],
                                             epsabs=config.abs_tol, epsrel=config.rel_tol)
        except integrate.IntegrationWarning as warning:
            raise ConvergenceError(f"2D quadrature failed at xi={params.xi}, beta={params.beta}: {warning}") from warning
    return value, error


def ergodic_c1_noma_at_a_inf_direct(params: SystemParams,
                                    config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """
    Get E[C1^N(a_inf)] by integrating the joint density over 0 <= x1 <= x2 <= T directly.

    Slow. Serves as an independent check of the single-integral reduction.
    """
    xi, beta = params.xi, params.beta
    upper = config.truncation_multiplier * beta

    def integrand(x1: float, x2: float) -> float:
        density = 2.0 / beta ** 2 * math.exp(-(x1 + x2) / beta)
        a_inf = 1.0 / (1.0 + math.sqrt(1.0 + xi * x2))
        return density * (math.log1p(xi * x1) - math.log1p(a_inf * xi * x1)) / LN2

    value, error = _integrate_2d(integrand, (0.0, upper), (lambda x2: 0.0, lambda x2: x2), params, config)
    return ErgodicEstimate(max(value, 0.0), Method.QUADRATURE, error + 2.0 * math.exp(-upper / beta))


def ergodic_c2_noma_at_a_sup_direct(params: SystemParams,
                                    config: QuadratureConfig = DEFAULT_QUADRATURE) -> ErgodicEstimate:
    """
    Get E[C2^N(a_sup)] by integrating the joint density over 0 <= x1 <= x2 <= T directly.

    Slow. Serves as an independent check of the single-integral reduction.
    """
    xi, beta = params.xi, params.beta
    upper = config.truncation_multiplier * beta

    def integrand(x2: float, x1: float) -> float:
        density = 2.0 / beta ** 2 * math.exp(-(x1 + x2) / beta)
        a_sup = 1.0 / (1.0 + math.sqrt(1.0 + xi * x1))
        return density * math.log1p(a_sup * xi * x2) / LN2

    value, error = _integrate_2d(integrand, (0.0, upper), (lambda x1: x1, lambda x1: upper), params, config)
    return ErgodicEstimate(value, Method.QUADRATURE, error + 2.0 * math.exp(-upper / beta))

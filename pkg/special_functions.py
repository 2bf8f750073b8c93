"""The exponential integral E1 that every closed-form ergodic capacity is built on."""
from __future__ import annotations
import math
import logging
from dataclasses import dataclass
from model import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
SERIES_CUTOFF = 1.0  # The power series is used for x <= 1, the continued fraction above.
TINY = 1e-300  # Stands in for zero denominators in the Lentz recurrence.


@dataclass(frozen=True)
class PrecisionBudget:
    """How hard the E1 evaluation works."""

    rel_tol: float = 1e-15
    max_terms: int = 200

    def __post_init__(self) -> None:
        """Check the tolerance and the iteration cap."""
        if not (0 < self.rel_tol < 1e-6):
            raise DomainError(f"rel_tol must be in (0, 1e-6), got {self.rel_tol}.")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1, got {self.max_terms}.")


DEFAULT_BUDGET = PrecisionBudget()


def _check_argument(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"E1 is only defined here for finite arguments, got {x}.")
    if x <= 0:
        raise DomainError(f"E1 is only defined here for positive arguments, got {x}.")
    return x


def series_e1(x: float, budget: PrecisionBudget = DEFAULT_BUDGET) -> float:
    """
    Evaluate E1(x) = -gamma - ln(x) - sum_{k>=1} (-x)^k / (k k!).

    Accurate for small and moderate x. Used for x <= 1.

    :param x: A positive argument.
    :param budget: The tolerance and the maximum number of series terms.
    :return: E1(x).
    """
    x = _check_argument(x)
    head = -EULER_GAMMA - math.log(x)
    total = 0.0
    power = 1.0
    for k in range(1, budget.max_terms + 1):
        power *= -x / k
        term = power / k
        total += term
        if abs(term) <= budget.rel_tol * abs(head - total):
            return head - total
    raise ConvergenceError(f"The E1 series didn't converge for x={x} within {budget.max_terms} terms.")


def continued_fraction_scaled_e1(x: float, budget: PrecisionBudget = DEFAULT_BUDGET) -> float:
    """
    Evaluate e^x E1(x) from its continued fraction with the modified Lentz method.

    e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))). Converges quickly for x > 1.

    :param x: A positive argument. Should be greater than 1 for fast convergence.
    :param budget: The tolerance and the maximum number of fraction terms.
    :return: e^x E1(x).
    """
    x = _check_argument(x)
    b = x + 1.0
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, budget.max_terms + 1):
        an = -float(i * i)
        b += 2.0
        d = an * d + b
        d = 1.0 / (d if d != 0 else TINY)
        c = b + an / c
        if c == 0:
            c = TINY
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= budget.rel_tol:
            return h
    raise ConvergenceError(f"The E1 continued fraction didn't converge for x={x} within {budget.max_terms} terms.")


def exp_integral_e1(x: float, budget: PrecisionBudget = DEFAULT_BUDGET) -> float:
    """
    Get the exponential integral E1(x) = integral from x to infinity of e^-u / u du.

    :param x: A positive finite argument.
    :param budget: The tolerance and the iteration cap.
    :return: E1(x). 0 once e^-x underflows.
    """
    x = _check_argument(x)
    if x <= SERIES_CUTOFF:
        return series_e1(x, budget)
    return math.exp(-x) * continued_fraction_scaled_e1(x, budget)


def exp_scaled_e1(x: float, budget: PrecisionBudget = DEFAULT_BUDGET) -> float:
    """
    Get e^x E1(x) without overflow.

    The closed-form ergodic capacities all have the shape e^c E1(c), and e^c overflows for large c.

    :param x: A positive finite argument.
    :param budget: The tolerance and the iteration cap.
    :return: e^x E1(x).
    """
    x = _check_argument(x)
    if x <= SERIES_CUTOFF:
        return math.exp(x) * series_e1(x, budget)
    return continued_fraction_scaled_e1(x, budget)

"""Store the values passed between the fair-noma modules."""
from __future__ import annotations
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    """Exception raised when an argument is outside the domain of an operation."""

    pass


class ConvergenceError(RuntimeError):
    """Exception raised when an iterative or adaptive scheme can't meet its tolerance."""

    pass


class Method(str, Enum):
    """How an ergodic value was obtained."""

    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"
    MONTE_CARLO_FALLBACK = "monte-carlo-fallback"
    """Monte Carlo value standing in for a quadrature that failed to converge."""


class Quantity(str, Enum):
    """The per-sample statistics the Monte Carlo engine can average."""

    C1_OMA = "c1_oma"
    C2_OMA = "c2_oma"
    SUM_OMA = "sum_oma"
    C1_NOMA = "c1_noma"
    C2_NOMA = "c2_noma"
    SUM_NOMA = "sum_noma"
    SUM_GAP = "sum_gap"
    """S_N(a) - S_O on the same channel pair."""
    A_INF = "a_inf"
    A_SUP = "a_sup"

    @property
    def is_oma(self) -> bool:
        """Whether the quantity doesn't depend on the power allocation."""
        return self in (Quantity.C1_OMA, Quantity.C2_OMA, Quantity.SUM_OMA, Quantity.A_INF, Quantity.A_SUP)


CAPACITY_QUANTITIES = (Quantity.C1_OMA, Quantity.C2_OMA, Quantity.SUM_OMA,
                       Quantity.C1_NOMA, Quantity.C2_NOMA, Quantity.SUM_NOMA)


class PolicyKind(str, Enum):
    """How the power allocation is chosen for each channel pair."""

    FIXED = "fixed"
    AT_INF = "at-inf"
    AT_SUP = "at-sup"
    MIDPOINT = "midpoint"


def _check_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, got {value}.")


@dataclass(frozen=True)
class SystemParams:
    """The transmit SNR and the Rayleigh scale of the two-user downlink."""

    xi: float
    """Linear transmit SNR."""
    beta: float = 1.0
    """Mean of the exponentially distributed channel SNR gain."""

    def __post_init__(self) -> None:
        """Check that both parameters are positive."""
        _check_positive("xi", self.xi)
        _check_positive("beta", self.beta)

    @classmethod
    def from_db(cls, snr_db: float, beta: float = 1.0) -> SystemParams:
        """
        Build the parameters from a transmit SNR in dB.

        :param snr_db: The transmit SNR in dB. Converted with xi = 10^(dB/10).
        :param beta: The Rayleigh scale.
        """
        if not math.isfinite(snr_db):
            raise DomainError(f"snr_db must be finite, got {snr_db}.")
        return cls(10 ** (snr_db / 10), beta)

    @property
    def snr_db(self) -> float:
        """The transmit SNR in dB."""
        return 10 * math.log10(self.xi)

    @property
    def mean_snr(self) -> float:
        """The product beta * xi that every closed form depends on."""
        return self.beta * self.xi


@dataclass(frozen=True)
class ChannelPair:
    """
    The SNR gains of the two scheduled users.

    The gains are sorted at construction so that MU-1 is always the weak user.
    """

    g_weak: float
    g_strong: float

    def __post_init__(self) -> None:
        """Sort the gains and check that they are positive."""
        _check_positive("g_weak", self.g_weak)
        _check_positive("g_strong", self.g_strong)
        if self.g_weak > self.g_strong:
            weak, strong = self.g_strong, self.g_weak
            object.__setattr__(self, "g_weak", weak)
            object.__setattr__(self, "g_strong", strong)

    @property
    def is_degenerate(self) -> bool:
        """Whether both users see the same gain."""
        return self.g_weak == self.g_strong


@dataclass(frozen=True)
class PowerAllocation:
    """The fraction of the transmit power given to the strong user MU-2."""

    a: float

    def __post_init__(self) -> None:
        """Check that 0 < a < 1."""
        if not (0 < self.a < 1):
            raise DomainError(f"The power allocation coefficient must be in (0, 1), got {self.a}.")

    def __float__(self) -> float:
        """Get the coefficient."""
        return self.a


ALLOCATION_TYPE = Union[float, PowerAllocation]


def as_allocation(a: ALLOCATION_TYPE) -> PowerAllocation:
    """Wrap a bare coefficient in a `PowerAllocation`."""
    return a if isinstance(a, PowerAllocation) else PowerAllocation(float(a))


@dataclass(frozen=True)
class FairRegion:
    """The power allocations for which neither user does worse than with OMA."""

    a_inf: float
    a_sup: float

    def __post_init__(self) -> None:
        """Check 0 < a_inf <= a_sup < 1/2."""
        if not (0 < self.a_inf <= self.a_sup < 0.5):
            raise DomainError(f"Invalid fair region [{self.a_inf}, {self.a_sup}].")

    def contains(self, a: ALLOCATION_TYPE) -> bool:
        """Whether `a` lies in [a_inf, a_sup]."""
        return self.a_inf <= float(a) <= self.a_sup

    @property
    def width(self) -> float:
        """a_sup - a_inf."""
        return self.a_sup - self.a_inf

    @property
    def midpoint(self) -> float:
        """The middle of the region."""
        return 0.5 * (self.a_inf + self.a_sup)

    def interpolate(self, t: float) -> float:
        """
        Get the allocation a fraction `t` of the way from a_inf to a_sup.

        :param t: A value in [0, 1].
        """
        if not (0 <= t <= 1):
            raise DomainError(f"The interpolation fraction must be in [0, 1], got {t}.")
        return self.a_inf + t * self.width


@dataclass(frozen=True)
class CapacityReport:
    """The OMA and NOMA capacities of one channel pair at one allocation, in bits/s/Hz."""

    c1_oma: float
    c2_oma: float
    c1_noma: float
    c2_noma: float
    a_used: PowerAllocation
    sum_oma: float = field(init=False)
    sum_noma: float = field(init=False)

    def __post_init__(self) -> None:
        """Fill in the sum capacities."""
        object.__setattr__(self, "sum_oma", self.c1_oma + self.c2_oma)
        object.__setattr__(self, "sum_noma", self.c1_noma + self.c2_noma)

    @property
    def fair_to_weak_user(self) -> bool:
        """C1^N(a) >= C1^O."""
        return self.c1_noma >= self.c1_oma

    @property
    def fair_to_strong_user(self) -> bool:
        """C2^N(a) >= C2^O."""
        return self.c2_noma >= self.c2_oma

    def as_dict(self) -> dict[str, float]:
        """Get the report as plain numbers."""
        return {"a": self.a_used.a,
                "c1_oma": self.c1_oma, "c2_oma": self.c2_oma, "sum_oma": self.sum_oma,
                "c1_noma": self.c1_noma, "c2_noma": self.c2_noma, "sum_noma": self.sum_noma}


@dataclass(frozen=True)
class ErgodicEstimate:
    """An expected capacity in bits/s/Hz, how it was computed, and its absolute error bound."""

    value: float
    method: Method
    error_bound: float = 0.0

    def __post_init__(self) -> None:
        """Check the value and the error bound."""
        if not math.isfinite(self.value) or self.value < 0:
            raise DomainError(f"An ergodic capacity must be finite and non-negative, got {self.value}.")
        if not math.isfinite(self.error_bound) or self.error_bound < 0:
            raise DomainError(f"The error bound must be finite and non-negative, got {self.error_bound}.")

    def __str__(self) -> str:
        """Get a readable summary."""
        return f"{self.value:.6f} ± {self.error_bound:.1e} ({self.method.value})"


@dataclass(frozen=True)
class McResult:
    """The outcome of a Monte Carlo estimate."""

    mean: float
    std_error: float
    n_samples: int
    seed: int

    def within(self, reference: float, n_sigma: float = 3.0, floor: float = 0.0) -> bool:
        """
        Whether `reference` is within `n_sigma` standard errors of the mean.

        :param floor: The smallest tolerance to accept, for references with their own error.
        """
        return abs(self.mean - reference) <= max(n_sigma * self.std_error, floor)


@dataclass(frozen=True)
class ResultRow:
    """One line of experiment output."""

    sweep_value: float
    quantity_name: str
    value: float
    error_bound: float
    method: str

    def as_dict(self) -> dict[str, Union[float, str]]:
        """Get the row with the field names used in CSV and JSON output."""
        return {"sweep_value": self.sweep_value, "quantity": self.quantity_name, "method": self.method,
                "value": self.value, "error_bound": self.error_bound}


def row_from_estimate(sweep_value: float, name: str, estimate: Union[ErgodicEstimate, McResult],
                      method: Optional[Method] = None) -> ResultRow:
    """
    Turn an estimate into an output row.

    :param sweep_value: The value of the swept variable.
    :param name: The name of the quantity.
    :param estimate: A closed-form/quadrature estimate or a Monte Carlo result.
    :param method: Overrides the method label (e.g. for fallback rows).
    """
    if isinstance(estimate, McResult):
        label = method or Method.MONTE_CARLO
        return ResultRow(sweep_value, name, estimate.mean, estimate.std_error, label.value)
    label = method or estimate.method
    return ResultRow(sweep_value, name, estimate.value, estimate.error_bound, label.value)

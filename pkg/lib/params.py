"""Control parameters of the blind calibration / dictionary learning model.

ModelParams holds the five dimensionless parameters (alpha, pi, rho, delta,
eta). The side-information ratio eta is either a non-negative float or the
INFINITE sentinel, which selects the dictionary-learning limit without
ever forming 1/eta.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

from lib.errors import InvalidArgumentError

# Shared regularisation for delta = 0 in the theory and the AMP denominators.
DELTA_FLOOR = 1e-12


class Infinite(Enum):
    """Sentinel type for eta = infinity (no side information)."""

    INFINITE = "inf"

    def __str__(self) -> str:
        return self.value

    def __repr__(self) -> str:
        return "INFINITE"


INFINITE = Infinite.INFINITE

Eta = Union[float, Infinite]


class AmpMode(Enum):
    """Whether the matrix is learned with (CALIBRATION) or without side information."""

    CALIBRATION = "calibration"
    DICTIONARY = "dictionary"

    def __str__(self) -> str:
        return self.value


def is_infinite(eta: Eta) -> bool:
    return eta is INFINITE


def parse_eta(value: Union[str, float, Infinite]) -> Eta:
    """Parse an eta value, accepting "inf" / "infinite" for the sentinel.

    Raises:
        InvalidArgumentError: if the value is negative, NaN or not a number
    """
    if value is INFINITE:
        return INFINITE
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinite", "infinity", "+inf"):
            return INFINITE
        try:
            value = float(text)
        except ValueError:
            raise InvalidArgumentError(f"eta must be a number or 'inf', got {value!r}") from None
    value = float(value)
    if math.isinf(value) and value > 0:
        return INFINITE
    if not math.isfinite(value) or value < 0:
        raise InvalidArgumentError(f"eta must be >= 0 or 'inf', got {value!r}")
    return value


def format_eta(eta: Eta) -> str:
    return "inf" if is_infinite(eta) else repr(float(eta))


def eta_ratio(eta: Eta) -> float:
    """Return eta/(1+eta), the conditional variance of F0 given F'."""
    if is_infinite(eta):
        return 1.0
    return eta / (1.0 + eta)


def floored_delta(delta: float, floor: float = DELTA_FLOOR) -> float:
    return max(delta, floor)


@dataclass(frozen=True)
class ModelParams:
    """The five control parameters of the model.

    Attributes:
        alpha: M/N, measurements per signal component
        pi: P/N, number of signals per dictionary column
        rho: fraction of non-zero signal components, in (0, 1]
        delta: measurement noise variance
        eta: side-information noise ratio, or INFINITE
    """

    alpha: float
    pi: float
    rho: float
    delta: float = 0.0
    eta: Eta = 1e-2

    def __post_init__(self):
        for name in ("alpha", "pi", "rho", "delta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 0:
            raise InvalidArgumentError(f"alpha must be > 0, got {self.alpha}")
        if self.pi <= 0:
            raise InvalidArgumentError(f"pi must be > 0, got {self.pi}")
        if not 0 < self.rho <= 1:
            raise InvalidArgumentError(f"rho must be in (0, 1], got {self.rho}")
        if self.delta < 0:
            raise InvalidArgumentError(f"delta must be >= 0, got {self.delta}")
        object.__setattr__(self, "eta", parse_eta(self.eta))

    @property
    def mode(self) -> AmpMode:
        return AmpMode.DICTIONARY if is_infinite(self.eta) else AmpMode.CALIBRATION

    def with_pi(self, pi: float) -> "ModelParams":
        return ModelParams(self.alpha, pi, self.rho, self.delta, self.eta)

    def with_eta(self, eta: Eta) -> "ModelParams":
        return ModelParams(self.alpha, self.pi, self.rho, self.delta, eta)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "pi": self.pi,
            "rho": self.rho,
            "delta": self.delta,
            "eta": format_eta(self.eta),
        }

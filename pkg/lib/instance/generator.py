"""Synthetic problem instances.

An instance is the triple (F0, X0, Y) drawn from the generative model

    F0_{mu i} ~ N(0, 1)                      (M x N dictionary)
    X0_{il}   ~ (1 - rho) delta + rho N(0, 1) (N x P signals)
    Y         = F0 X0 / sqrt(N) + noise        (noise variance delta)

plus the side information F' = (F0 + sqrt(eta) W)/sqrt(1 + eta) in the
calibration setting. Each field is drawn from its own PCG64 substream keyed
by (seed, field tag), so F0 and F' are shared between instances that only
differ in pi.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from lib.errors import InvalidArgumentError, InvalidSizeError
from lib.params import ModelParams, is_infinite

logger = logging.getLogger(__name__)


class FieldTag:
    """Substream keys for the independently reproducible random fields."""

    F0 = 0
    X0 = 1
    NOISE = 2
    W = 3
    JITTER = 4


def substream(seed: int, tag: int) -> np.random.Generator:
    """Return the PCG64 generator for one (seed, field tag) pair."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(tag,))))


def problem_sizes(params: ModelParams, n: int) -> tuple[int, int]:
    """Return (M, P) = (round(alpha N), round(pi N)), rounding half to even.

    Raises:
        InvalidSizeError: if N < 2 or either size rounds to zero
    """
    if n < 2:
        raise InvalidSizeError(f"N must be >= 2, got {n}")
    m = round(params.alpha * n)
    p = round(params.pi * n)
    if m < 1 or p < 1:
        raise InvalidSizeError(
            f"alpha={params.alpha}, pi={params.pi} at N={n} give M={m}, P={p}; both must be >= 1"
        )
    return m, p


def counting_bound(m: int, n: int, p: int, rho: float) -> bool:
    """Whether there are more measurements than unknowns, MP > NM + P rho N.

    Evaluated exactly on rationals.
    """
    return Fraction(m * p) > Fraction(n * m) + Fraction(p) * Fraction(rho) * Fraction(n)


def counting_bound_ratio(alpha: float, pi: float, rho: float) -> bool:
    """The counting bound in ratio form, pi (alpha - rho) > alpha, exactly."""
    a, q, r = Fraction(alpha), Fraction(pi), Fraction(rho)
    return q * (a - r) > a


@dataclass(eq=False)
class ProblemInstance:
    """A generated instance together with the parameters that produced it.

    Attributes:
        F0: M x N unscaled dictionary with unit-variance elements
        X0: N x P spike-slab signals
        Y: M x P measurements
        Fprime: M x N side information, None when eta is INFINITE
        params: the model parameters
        seed: the 64-bit seed of all substreams
    """

    F0: np.ndarray
    X0: np.ndarray
    Y: np.ndarray
    Fprime: Optional[np.ndarray]
    params: ModelParams
    seed: int

    @property
    def N(self) -> int:
        return self.F0.shape[1]

    @property
    def M(self) -> int:
        return self.F0.shape[0]

    @property
    def P(self) -> int:
        return self.X0.shape[1]

    @property
    def scaled_dictionary(self) -> np.ndarray:
        return self.F0 / np.sqrt(self.N)

    @property
    def counting_bound(self) -> bool:
        return counting_bound(self.M, self.N, self.P, self.params.rho)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        if self.params != other.params or self.seed != other.seed:
            return False
        if (self.Fprime is None) != (other.Fprime is None):
            return False
        pairs = [(self.F0, other.F0), (self.X0, other.X0), (self.Y, other.Y)]
        if self.Fprime is not None:
            pairs.append((self.Fprime, other.Fprime))
        return all(a.shape == b.shape and a.tobytes() == b.tobytes() for a, b in pairs)


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise InvalidArgumentError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2 ** 64:
        raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


def generate_instance(params: ModelParams, n: int, seed: int) -> ProblemInstance:
    """Draw an instance of size N from the generative model.

    Args:
        params: model parameters; M and P follow from alpha and pi
        n: signal dimension N (>= 2)
        seed: 64-bit seed

    Returns:
        ProblemInstance, deterministic in (params, n, seed)

    Raises:
        InvalidSizeError: if M or P rounds to zero
    """
    seed = _check_seed(seed)
    m, p = problem_sizes(params, n)

    f0 = substream(seed, FieldTag.F0).standard_normal((m, n))

    rng_x = substream(seed, FieldTag.X0)
    support = rng_x.random((n, p)) < params.rho
    x0 = np.where(support, rng_x.standard_normal((n, p)), 0.0)

    y = (f0 / np.sqrt(n)) @ x0
    if params.delta > 0:
        y = y + np.sqrt(params.delta) * substream(seed, FieldTag.NOISE).standard_normal((m, p))

    fprime = None
    if not is_infinite(params.eta):
        w = substream(seed, FieldTag.W).standard_normal((m, n))
        fprime = (f0 + np.sqrt(params.eta) * w) / np.sqrt(1.0 + params.eta)

    inst = ProblemInstance(F0=f0, X0=x0, Y=y, Fprime=fprime, params=params, seed=seed)
    logger.debug(
        f"Generated instance N={n} M={m} P={p} seed={seed} "
        f"sparsity={support.mean():.4f} counting_bound={inst.counting_bound}"
    )
    return inst

"""Scalar input/output functions of the model priors.

The signal prior is the Gauss-Bernoulli (spike-slab) law
    P(x) = (1 - rho) delta(x) + rho N(x; 0, 1)
and the matrix prior is the side-information Gaussian
    P(F | F') = N(F; F'/sqrt(1+eta), eta/(1+eta)),
which becomes N(0, 1) at eta = INFINITE.

f_a / f_c return the posterior mean and variance of x observed through the
Gaussian channel T = x + sqrt(sigma2) z. f_r / f_s do the same for the scaled
matrix element F/sqrt(N), with channel variance sigma2/N. All of them accept
numpy arrays for T (and for the side value), so the AMP engine calls them
on whole matrices at once.

oracle_posterior_moments computes the same moments by brute-force quadrature
and is only used to validate the closed forms.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import expit, logsumexp

from lib.errors import InvalidArgumentError, OracleFailureError
from lib.params import Eta, INFINITE, is_infinite, parse_eta
from lib.quadrature import gauss_hermite

SIGMA2_MIN = 1e-14
SIGMA2_MAX = 1e14

ORACLE_NODES = 512
ORACLE_TOL = 1e-10

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SignalPrior:
    """Spike-slab prior with a standard Gaussian slab."""

    rho: float

    def __post_init__(self):
        if not np.isfinite(self.rho) or not 0 < self.rho <= 1:
            raise InvalidArgumentError(f"rho must be in (0, 1], got {self.rho!r}")

    @property
    def mean(self) -> float:
        return 0.0

    @property
    def variance(self) -> float:
        return self.rho


@dataclass(frozen=True)
class MatrixPrior:
    """Gaussian prior of one matrix element given its noisy copy F'.

    Attributes:
        eta: side-information ratio, or INFINITE
        side_value: F' (unscaled); ignored when eta is INFINITE
    """

    eta: Eta
    side_value: Optional[ArrayLike] = None

    def __post_init__(self):
        object.__setattr__(self, "eta", parse_eta(self.eta))
        if not is_infinite(self.eta):
            if self.side_value is None:
                raise InvalidArgumentError("side_value is required when eta is finite")
            _require_finite("side_value", self.side_value)

    def scaled_mean(self, n: int) -> ArrayLike:
        """Conditional mean of F/sqrt(N)."""
        if is_infinite(self.eta):
            return 0.0
        return np.asarray(self.side_value, dtype=float) / (np.sqrt(n) * np.sqrt(1.0 + self.eta))

    def scaled_variance(self, n: int) -> float:
        """Conditional variance of F/sqrt(N)."""
        if is_infinite(self.eta):
            return 1.0 / n
        return self.eta / ((1.0 + self.eta) * n)


@dataclass(frozen=True)
class ChannelMoment:
    """Gaussian channel: pseudo-observation T with noise variance sigma2."""

    sigma2: float
    T: ArrayLike


def _require_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise InvalidArgumentError(f"{name} must be finite")


def _check_channel(sigma2, T) -> None:
    _require_finite("sigma2", sigma2)
    _require_finite("T", T)
    if np.any(np.asarray(sigma2) <= 0):
        raise InvalidArgumentError("sigma2 must be > 0")


def spike_slab_moments(sigma2: ArrayLike, T: ArrayLike, rho: float) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of the spike-slab prior (vectorised).

    The slab responsibility is computed from its log-odds so that small
    sigma2 and large |T| never overflow.

    Args:
        sigma2: channel variance (> 0), scalar or array broadcastable with T
        T: pseudo-observation
        rho: sparsity, in (0, 1]

    Returns:
        (mean, variance) arrays with the broadcast shape of (sigma2, T)
    """
    _check_channel(sigma2, T)
    s2 = np.clip(np.asarray(sigma2, dtype=float), SIGMA2_MIN, SIGMA2_MAX)
    T = np.asarray(T, dtype=float)

    slab_mean = T / (s2 + 1.0)
    slab_var = s2 / (s2 + 1.0)
    if rho >= 1.0:
        weight = np.ones(np.broadcast(s2, T).shape)
    else:
        log_odds = (
            np.log(rho / (1.0 - rho))
            + 0.5 * (np.log(s2) - np.log1p(s2))
            + np.square(T) / (2.0 * s2 * (s2 + 1.0))
        )
        weight = expit(log_odds)

    mean = weight * slab_mean
    var = weight * slab_var + weight * (1.0 - weight) * np.square(slab_mean)
    return mean, var


def matrix_moments(sigma2: ArrayLike, T: ArrayLike, eta: Eta, side_value: Optional[ArrayLike], n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of the scaled matrix element (vectorised).

    The channel observes F/sqrt(N) with variance sigma2/N. Written with eta
    multiplied through, so eta = 0 gives the known matrix (mean F'/sqrt(N),
    variance 0) without a special case.
    """
    if n < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {n}")
    _check_channel(sigma2, T)
    s2 = np.clip(np.asarray(sigma2, dtype=float), SIGMA2_MIN, SIGMA2_MAX)
    T = np.asarray(T, dtype=float)

    if is_infinite(eta):
        mean = T / (s2 + 1.0)
        var = np.broadcast_to(s2 / (n * (s2 + 1.0)), mean.shape).copy()
        return mean, var

    _require_finite("side_value", side_value)
    mu = np.asarray(side_value, dtype=float) / (np.sqrt(n) * np.sqrt(1.0 + eta))
    denom = s2 * (1.0 + eta) + eta
    mean = (eta * T + s2 * (1.0 + eta) * mu) / denom
    var = np.broadcast_to(s2 * eta / (n * denom), mean.shape).copy()
    return mean, var


def f_a(ch: ChannelMoment, prior: SignalPrior) -> ArrayLike:
    """Posterior mean of x under the spike-slab prior.

    Raises:
        InvalidArgumentError: for non-finite inputs or sigma2 <= 0
    """
    mean, _ = spike_slab_moments(ch.sigma2, ch.T, prior.rho)
    return mean[()]


def f_c(ch: ChannelMoment, prior: SignalPrior) -> ArrayLike:
    """Posterior variance of x, equal to sigma2 * d f_a / dT."""
    _, var = spike_slab_moments(ch.sigma2, ch.T, prior.rho)
    return var[()]


def f_r(ch: ChannelMoment, prior: MatrixPrior, n: int) -> ArrayLike:
    """Posterior mean of the scaled element F/sqrt(N)."""
    mean, _ = matrix_moments(ch.sigma2, ch.T, prior.eta, prior.side_value, n)
    return mean[()]


def f_s(ch: ChannelMoment, prior: MatrixPrior, n: int) -> ArrayLike:
    """Posterior variance of the scaled element F/sqrt(N)."""
    _, var = matrix_moments(ch.sigma2, ch.T, prior.eta, prior.side_value, n)
    return var[()]


def _mixture_moments(T: float, noise_var: float, spike_weight: float, mu: float, tau: float, nodes: int) -> Tuple[float, float]:
    """Moments of (1-w) delta_0 + w N(mu, tau) observed through N(T; x, noise_var).

    The slab integral runs over whichever Gaussian is narrower, so the other
    factor is smooth on the node scale.
    """
    knots, weights = gauss_hermite(nodes)
    with np.errstate(divide="ignore"):
        log_weights = np.log(weights)

    slab_weight = 1.0 - spike_weight
    if tau <= noise_var:
        xs = mu + np.sqrt(tau) * knots
        log_slab = _log_gauss(T, xs, noise_var)
    else:
        xs = T + np.sqrt(noise_var) * knots
        log_slab = _log_gauss(xs, mu, tau)
    logs = np.log(slab_weight) + log_weights + log_slab if slab_weight > 0 else np.full(nodes, -np.inf)

    if spike_weight > 0:
        xs = np.concatenate(([0.0], xs))
        logs = np.concatenate(([np.log(spike_weight) + _log_gauss(T, 0.0, noise_var)], logs))

    probs = np.exp(logs - logsumexp(logs))
    mean = float(probs @ xs)
    var = float(probs @ np.square(xs - mean))
    return mean, var


def _log_gauss(x, mean, var):
    return -0.5 * np.square(x - mean) / var - 0.5 * np.log(2.0 * np.pi * var)


def oracle_posterior_moments(
    ch: ChannelMoment,
    prior: Union[SignalPrior, MatrixPrior],
    n: int = 1,
    nodes: int = ORACLE_NODES,
) -> Tuple[float, float]:
    """Posterior (mean, variance) by Gauss-Hermite quadrature.

    The spike is handled analytically and the Gaussian part by quadrature.
    For a MatrixPrior, T and the returned moments refer to the scaled element
    F/sqrt(n) and the channel variance is sigma2/n.

    Raises:
        InvalidArgumentError: for invalid channel arguments
        OracleFailureError: if halving the node count moves either moment
            by more than 1e-10
    """
    if np.ndim(ch.T) != 0 or np.ndim(ch.sigma2) != 0:
        raise InvalidArgumentError("the oracle works on scalar channels only")
    _check_channel(ch.sigma2, ch.T)
    sigma2 = float(np.clip(ch.sigma2, SIGMA2_MIN, SIGMA2_MAX))
    T = float(ch.T)

    if isinstance(prior, SignalPrior):
        args = (T, sigma2, 1.0 - prior.rho, 0.0, 1.0)
    elif isinstance(prior, MatrixPrior):
        mu = float(np.asarray(prior.scaled_mean(n)))
        args = (T, sigma2 / n, 0.0, mu, prior.scaled_variance(n))
    else:
        raise InvalidArgumentError(f"unsupported prior {prior!r}")

    fine = _mixture_moments(*args, nodes=nodes)
    coarse = _mixture_moments(*args, nodes=max(2, nodes // 2))
    change = max(abs(fine[0] - coarse[0]), abs(fine[1] - coarse[1]))
    if change > ORACLE_TOL:
        raise OracleFailureError(
            f"quadrature did not converge for sigma2={sigma2}, T={T}: node halving changed moments by {change:.3e}"
        )
    return fine

"""Scalar-channel algebra shared by state evolution and the potential.

The order parameters (E, D) define two effective scalar Gaussian channels
with precisions m_hat_x (signal) and m_hat_F (dictionary). The helpers here
map (E, D) to those precisions and evaluate the channel-averaged posterior
variance of the spike-slab prior.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from lib.denoisers import spike_slab_moments
from lib.errors import DomainError
from lib.params import DELTA_FLOOR, Eta, ModelParams, floored_delta, is_infinite
from lib.quadrature import composite_legendre, gauss_hermite

DEFAULT_NODES = 200

# Above this precision the integrands are resolved on a panel rule in the
# rescaled variable instead of Gauss-Hermite.
SHARP_PRECISION = 1.0

# Gaussian tail cut-off (in standard deviations) for the panel rules.
TAIL = 12.0


@dataclass(frozen=True)
class SePoint:
    """Order parameters: signal MSE E and unscaled dictionary MSE D."""

    E: float
    D: float

    def as_tuple(self) -> Tuple[float, float]:
        return (self.E, self.D)


def denominator(E: float, D: float, params: ModelParams, delta_floor: float = DELTA_FLOOR) -> float:
    """Q = Delta + E + rho D - E D, with Delta floored."""
    delta = floored_delta(params.delta, delta_floor)
    return delta + E + params.rho * D - E * D


def hat_params(p: SePoint, params: ModelParams, delta_floor: float = DELTA_FLOOR) -> Tuple[float, float]:
    """Channel precisions (m_hat_x, m_hat_F) at the point p.

    Raises:
        DomainError: for non-finite (E, D) or a non-positive denominator
    """
    if not (math.isfinite(p.E) and math.isfinite(p.D)):
        raise DomainError(f"non-finite order parameters {p}")
    q = denominator(p.E, p.D, params, delta_floor)
    if q <= 0:
        raise DomainError(f"non-positive denominator {q} at {p}")
    m_x = params.alpha * (1.0 - p.D) / q
    m_f = params.pi * (params.rho - p.E) / q
    return m_x, m_f


def panel_nodes(nodes: int) -> int:
    return max(16, nodes // 10)


def _transition(rho: float, sigma2: float) -> float:
    """Point (in units of the channel noise) where the slab takes over."""
    if rho >= 1.0:
        return 0.0
    log_odds = math.log(rho / (1.0 - rho)) + 0.5 * (math.log(sigma2) - math.log1p(sigma2))
    return math.sqrt(-2.0 * log_odds * (1.0 + sigma2)) if log_odds < 0 else 0.0


def channel_mmse(m_hat: float, rho: float, nodes: int = DEFAULT_NODES) -> float:
    """Average posterior variance of the spike-slab prior at precision m_hat.

    E' = (1 - rho) E_z[f_c(1/m, z/sqrt(m))] + rho E_z[f_c(1/m, z sqrt(1 + 1/m))]

    For m_hat > 1 the slab term is written as V - E[g] with
    g = (1 - w)(V - w m^2) (w the slab responsibility), which is localised
    around the spike and integrated in the variable T/sqrt(sigma2).
    """
    if math.isnan(m_hat) or m_hat < 0:
        raise DomainError(f"channel precision must be >= 0, got {m_hat}")
    if m_hat == 0:
        return rho
    if math.isinf(m_hat):
        return 0.0

    sigma2 = 1.0 / m_hat
    if m_hat <= SHARP_PRECISION:
        z, w = gauss_hermite(nodes)
        _, spike = spike_slab_moments(sigma2, z * math.sqrt(sigma2), rho)
        _, slab = spike_slab_moments(sigma2, z * math.sqrt(1.0 + sigma2), rho)
        value = (1.0 - rho) * float(w @ spike) + rho * float(w @ slab)
        return min(max(value, 0.0), rho)

    sigma = math.sqrt(sigma2)
    u0 = _transition(rho, sigma2)
    per_panel = panel_nodes(nodes)

    # spike: T = sigma z, z standard normal, even integrand
    z, w = composite_legendre(0.0, u0 + TAIL, per_panel)
    _, spike_var = spike_slab_moments(sigma2, sigma * z, rho)
    spike = 2.0 * float(w @ (np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) * spike_var))

    # slab: T = sigma u, T ~ N(0, 1 + sigma2)
    slab_var = sigma2 / (1.0 + sigma2)
    if rho >= 1.0:
        slab = slab_var
    else:
        u, w = composite_legendre(0.0, u0 + TAIL * math.sqrt(1.0 + sigma2), per_panel)
        T = sigma * u
        mean, var = spike_slab_moments(sigma2, T, rho)
        gap = slab_var - var
        density = sigma / math.sqrt(2.0 * math.pi * (1.0 + sigma2)) * np.exp(-sigma2 * u * u / (2.0 * (1.0 + sigma2)))
        slab = slab_var - 2.0 * float(w @ (density * gap))

    value = (1.0 - rho) * spike + rho * slab
    return min(max(value, 0.0), rho)


def matrix_mse(m_hat_f: float, eta: Eta) -> float:
    """D' = 1/(m_hat_F + (1 + eta)/eta), the posterior variance of F.

    eta = INFINITE gives 1/(m_hat_F + 1) and eta = 0 gives 0.
    """
    if math.isinf(m_hat_f):
        return 0.0
    if is_infinite(eta):
        return 1.0 / (m_hat_f + 1.0)
    return eta / (eta * m_hat_f + 1.0 + eta)

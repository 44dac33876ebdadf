"""Replica-symmetric potential Phi(E, D) of the Gauss-Bernoulli / Gaussian model.

With Q = Delta + E + rho D - E D and the channel precisions
m_x = alpha (1 - D)/Q, m_F = pi (rho - E)/Q, the potential is

    Phi = -(alpha/2) log Q - alpha (Delta + rho)/Q + alpha/2
          + I(m_x) + (alpha/(2 pi)) m_F - (alpha/(2 pi)) log(1 + eta m_F/(1 + eta))

where I is the spike/slab log-integral pair. It is evaluated in the
equivalent form

    Phi = -(alpha/2) log Q - (alpha/2)(Delta + E D)/Q + J(m_x)
          - (alpha/(2 pi)) log(1 + eta m_F/(1 + eta)),    J(m) = I(m) - rho m/2

in which the O(1/Q) terms have cancelled analytically, so Phi stays accurate
at the exact-recovery corner where Q is of order Delta.
"""

import math
from typing import Tuple

import numpy as np

from lib.errors import ConsistencyError, DomainError
from lib.params import DELTA_FLOOR, ModelParams, floored_delta, is_infinite
from lib.quadrature import composite_legendre, gauss_hermite, normal_pdf
from lib.theory.channels import (
    DEFAULT_NODES,
    SHARP_PRECISION,
    TAIL,
    SePoint,
    denominator,
    hat_params,
    panel_nodes,
)

STATIONARITY_TOL = 1e-6
STEP = 1e-4

# relative slack on the upper bounds E <= rho and D <= 1
_BOUND_SLACK = 1e-12


def _spike_term(m: float, rho: float, nodes: int) -> float:
    """(1 - rho) E_z log[(1 - rho) + rho (1 + m)^(-1/2) exp(kappa z^2/2)], kappa = m/(1 + m)."""
    kappa = m / (1.0 + m)
    base = math.log(rho) - 0.5 * math.log1p(m)
    if m <= SHARP_PRECISION:
        z, w = gauss_hermite(nodes)
        values = np.logaddexp(math.log(1.0 - rho), base + 0.5 * kappa * z * z)
        return (1.0 - rho) * float(w @ values)
    gap = math.log(1.0 - rho) - base
    z0 = math.sqrt(2.0 * gap / kappa) if gap > 0 else 0.0
    z, w = composite_legendre(0.0, z0 + TAIL, panel_nodes(nodes))
    values = np.logaddexp(math.log(1.0 - rho), base + 0.5 * kappa * z * z)
    return (1.0 - rho) * 2.0 * float(w @ (normal_pdf(z) * values))


def _slab_term(m: float, rho: float, nodes: int) -> float:
    """rho [log rho - log(1 + m)/2 + E_z log(1 + c exp(-m z^2/2))], c = (1 - rho)/rho sqrt(1 + m)."""
    log_c = math.log((1.0 - rho) / rho) + 0.5 * math.log1p(m)
    if m <= SHARP_PRECISION:
        z, w = gauss_hermite(nodes)
        tail = float(w @ np.log1p(np.exp(log_c - 0.5 * m * z * z)))
    else:
        # u = sqrt(m) z, the integrand is localised at |u| of order sqrt(2 log c)
        root_m = math.sqrt(m)
        upper = math.sqrt(2.0 * max(log_c, 0.0)) + TAIL
        u, w = composite_legendre(0.0, upper, panel_nodes(nodes))
        values = np.log1p(np.exp(log_c - 0.5 * u * u))
        tail = 2.0 / root_m * float(w @ (normal_pdf(u / root_m) * values))
    return rho * (math.log(rho) - 0.5 * math.log1p(m) + tail)


def signal_entropy(m: float, rho: float, nodes: int = DEFAULT_NODES) -> float:
    """J(m) = I(m) - rho m/2 for the spike-slab prior; J(0) = 0."""
    if m < 0 or math.isnan(m):
        raise DomainError(f"signal channel precision must be >= 0, got {m}")
    if m == 0:
        return 0.0
    if rho >= 1.0:
        return -0.5 * math.log1p(m)
    return _spike_term(m, rho, nodes) + _slab_term(m, rho, nodes)


def _check_domain(E: float, D: float, params: ModelParams) -> None:
    if not (math.isfinite(E) and math.isfinite(D)):
        raise DomainError(f"non-finite arguments E={E}, D={D}")
    if E < 0 or E > params.rho * (1.0 + _BOUND_SLACK):
        raise DomainError(f"E={E} outside [0, rho={params.rho}]")
    if D < 0 or D > 1.0 + _BOUND_SLACK:
        raise DomainError(f"D={D} outside [0, 1]")


def potential(E: float, D: float, params: ModelParams, nodes: int = DEFAULT_NODES, delta_floor: float = DELTA_FLOOR) -> float:
    """Evaluate Phi(E, D).

    Args:
        E: signal MSE in [0, rho]
        D: dictionary MSE in [0, 1]
        params: model parameters (delta is floored at delta_floor)
        nodes: Gauss-Hermite node count of the signal integrals

    Raises:
        DomainError: outside the admissible region or for Q <= 0
    """
    _check_domain(E, D, params)
    E = min(E, params.rho)
    D = min(D, 1.0)
    m_x, m_f = hat_params(SePoint(E, D), params, delta_floor)
    q = denominator(E, D, params, delta_floor)
    delta = floored_delta(params.delta, delta_floor)
    alpha = params.alpha

    phi = -0.5 * alpha * math.log(q) - 0.5 * alpha * (delta + E * D) / q
    phi += signal_entropy(max(m_x, 0.0), params.rho, nodes)
    if is_infinite(params.eta):
        phi -= alpha / (2.0 * params.pi) * math.log1p(m_f)
    elif params.eta > 0:
        phi -= alpha / (2.0 * params.pi) * math.log1p(params.eta * m_f / (1.0 + params.eta))
    return phi


def potential_gradient(
    E: float,
    D: float,
    params: ModelParams,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
    step: float = STEP,
) -> Tuple[float, float]:
    """Finite-difference gradient in log coordinates, (E dPhi/dE, D dPhi/dD).

    Central differences in the interior; second-order one-sided differences
    at E = rho or D = 1; a coordinate at zero is reported as 0.
    """

    def phi(e, d):
        return potential(e, d, params, nodes, delta_floor)

    def directional(x, upper, shift):
        if x == 0:
            return 0.0
        if x * math.exp(step) <= upper:
            return (phi(*shift(x * math.exp(step))) - phi(*shift(x * math.exp(-step)))) / (2.0 * step)
        f0 = phi(*shift(x))
        f1 = phi(*shift(x * math.exp(-step)))
        f2 = phi(*shift(x * math.exp(-2.0 * step)))
        return (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * step)

    g_e = directional(E, params.rho, lambda e: (e, D))
    g_d = directional(D, 1.0, lambda d: (E, d))
    return g_e, g_d


def check_stationary(
    point: SePoint,
    params: ModelParams,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
    tol: float = STATIONARITY_TOL,
) -> float:
    """Verify that a fixed point is a stationary point of Phi.

    Returns:
        the norm of the log-coordinate gradient

    Raises:
        ConsistencyError: if the norm exceeds tol
    """
    g_e, g_d = potential_gradient(point.E, point.D, params, nodes, delta_floor)
    norm = math.hypot(g_e, g_d)
    if norm > tol:
        raise ConsistencyError(
            f"fixed point E={point.E:.6e}, D={point.D:.6e} is not stationary: |grad Phi| = {norm:.3e} > {tol:g}"
        )
    return norm


def potential_grid(
    params: ModelParams,
    size: int = 40,
    lower: float = 1e-12,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Phi on a size x size log-spaced grid over [lower, rho] x [lower, 1].

    Returns:
        (E values, D values, Phi matrix indexed [i_E, i_D])
    """
    e_values = np.geomspace(lower, params.rho, size)
    d_values = np.geomspace(lower, 1.0, size)
    phi = np.empty((size, size))
    for i, e in enumerate(e_values):
        for j, d in enumerate(d_values):
            phi[i, j] = potential(float(e), float(d), params, nodes, delta_floor)
    return e_values, d_values, phi

"""Tests for the replica potential."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from lib.errors import ConsistencyError, DomainError
from lib.params import INFINITE, ModelParams
from lib.theory import (
    SePoint,
    check_stationary,
    denominator,
    hat_params,
    potential,
    potential_gradient,
    potential_grid,
    se_fixed_points,
    signal_entropy,
)


def log_partition(B, A, rho):
    """log of (1 - rho) + rho (1 + A)^(-1/2) exp(B^2 / (2 (1 + A)))."""
    return np.logaddexp(math.log(1 - rho), math.log(rho) - 0.5 * math.log1p(A) + B * B / (2 * (1 + A)))


def reference_free_entropy(m, rho):
    """E over x and z of the scalar-channel log partition function."""
    def spike(z):
        return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) * log_partition(math.sqrt(m) * z, m, rho)

    def slab(z):
        return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) * log_partition(math.sqrt(m * (1 + m)) * z, m, rho)

    options = dict(points=[0.0], limit=400, epsabs=1e-13, epsrel=1e-12)
    return (1 - rho) * quad(spike, -14, 14, **options)[0] + rho * quad(slab, -14, 14, **options)[0]


def five_group_potential(E, D, params):
    delta = max(params.delta, 1e-12)
    q = denominator(E, D, params)
    m_x, m_f = hat_params(SePoint(E, D), params)
    alpha, pi = params.alpha, params.pi
    side = math.log1p(m_f) if params.eta is INFINITE else math.log1p(params.eta * m_f / (1 + params.eta))
    return (
        -0.5 * alpha * math.log(q)
        - alpha * (delta + params.rho) / q
        + 0.5 * alpha
        + reference_free_entropy(m_x, params.rho)
        + alpha / (2 * pi) * m_f
        - alpha / (2 * pi) * side
    )


@pytest.mark.parametrize("m", [0.05, 0.7, 1.0, 4.0, 50.0, 800.0])
@pytest.mark.parametrize("rho", [0.1, 0.4])
def test_signal_entropy_matches_direct_integration(m, rho):
    expected = reference_free_entropy(m, rho) - rho * m / 2
    assert signal_entropy(m, rho) == pytest.approx(expected, abs=1e-8)


def test_signal_entropy_special_values():
    assert signal_entropy(0.0, 0.3) == 0.0
    assert signal_entropy(3.0, 1.0) == pytest.approx(-0.5 * math.log(4.0))
    with pytest.raises(DomainError):
        signal_entropy(-1.0, 0.3)


@pytest.mark.parametrize("eta", [1e-2, 1.0, INFINITE])
@pytest.mark.parametrize("E, D", [(0.15, 0.5), (0.05, 0.01), (0.2, 0.9)])
def test_reorganised_form_matches_five_group_form(eta, E, D):
    params = ModelParams(alpha=0.5, pi=2.5, rho=0.2, delta=1e-3, eta=eta)
    assert potential(E, D, params) == pytest.approx(five_group_potential(E, D, params), abs=1e-7)


@pytest.mark.parametrize("E, D", [(-0.1, 0.5), (0.3, 0.5), (0.1, -0.2), (0.1, 1.5), (math.nan, 0.5), (0.1, math.inf)])
def test_domain_errors(E, D):
    params = ModelParams(alpha=0.5, pi=2.0, rho=0.2)
    with pytest.raises(DomainError):
        potential(E, D, params)


def test_potential_is_finite_near_exact_recovery():
    params = ModelParams(alpha=0.5, pi=4.0, rho=0.2, delta=0.0, eta=1e-2)
    assert math.isfinite(potential(1e-12, 1e-12, params))
    assert math.isfinite(potential(0.2, 1.0, params))


def test_fixed_points_are_stationary():
    params = ModelParams(alpha=0.5, pi=3.0, rho=0.2, delta=1e-4, eta=1e-2)
    converged = [fp for fp in se_fixed_points(params) if fp.converged]
    assert converged
    for fp in converged:
        assert check_stationary(fp.point, params) <= 1e-6


def test_non_stationary_point_rejected():
    params = ModelParams(alpha=0.5, pi=3.0, rho=0.2, delta=1e-4, eta=1e-2)
    with pytest.raises(ConsistencyError):
        check_stationary(SePoint(0.1, 0.5), params)


def test_gradient_at_upper_bounds_is_one_sided():
    params = ModelParams(alpha=0.5, pi=3.0, rho=0.2, delta=1e-2, eta=INFINITE)
    g_e, g_d = potential_gradient(0.2, 1.0, params)
    assert math.isfinite(g_e) and math.isfinite(g_d)
    # (rho, 1) is a fixed point of the recursion without side information
    assert math.hypot(g_e, g_d) <= 1e-6


def test_potential_grid():
    params = ModelParams(alpha=0.5, pi=2.0, rho=0.2, delta=1e-6, eta=1e-2)
    e_values, d_values, phi = potential_grid(params, size=6)
    assert phi.shape == (6, 6)
    assert e_values[0] == pytest.approx(1e-12) and e_values[-1] == pytest.approx(0.2)
    assert d_values[-1] == pytest.approx(1.0)
    assert phi[2, 3] == potential(float(e_values[2]), float(d_values[3]), params)


@pytest.mark.parametrize("eta", [1e-2, INFINITE])
def test_uninformative_value(eta):
    params = ModelParams(alpha=0.5, pi=3.0, rho=0.2, delta=0.0, eta=eta)
    assert potential(0.2, 1.0, params) == pytest.approx(0.152357, abs=1e-5)
    assert potential(0.2, 1.0, params) == pytest.approx(-0.25 * (math.log(0.2 + 1e-12) + 1.0), abs=1e-12)


@pytest.mark.parametrize("E, D", [(0.1, 0.005), (0.02, 0.3), (0.19, 0.9)])
def test_doubling_quadrature_nodes_leaves_potential_unchanged(E, D):
    params = ModelParams(alpha=0.5, pi=4.0, rho=0.2, delta=1e-8, eta=1e-2)
    assert abs(potential(E, D, params, nodes=400) - potential(E, D, params, nodes=200)) <= 1e-10

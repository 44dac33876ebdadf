"""Tests for the scalar denoisers and their quadrature oracle."""

import itertools

import numpy as np
import pytest

from lib.denoisers import (
    ChannelMoment,
    MatrixPrior,
    SignalPrior,
    f_a,
    f_c,
    f_r,
    f_s,
    matrix_moments,
    oracle_posterior_moments,
    spike_slab_moments,
)
from lib.errors import InvalidArgumentError, OracleFailureError
from lib.params import INFINITE
from lib.quadrature import composite_legendre, gauss_hermite, gauss_legendre

SIGMA2_GRID = [1e-4, 1e-2, 0.3, 1.0, 10.0, 1e3]
T_GRID = [-5.0, -1.2, -0.1, 0.0, 0.3, 2.0, 8.0]
RHO_GRID = [0.05, 0.3, 0.9, 1.0]


# --- quadrature ---------------------------------------------------------------

def test_gauss_hermite_moments():
    knots, weights = gauss_hermite(40)
    assert weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert weights @ knots == pytest.approx(0.0, abs=1e-14)
    assert weights @ knots ** 2 == pytest.approx(1.0, abs=1e-13)
    assert weights @ knots ** 4 == pytest.approx(3.0, abs=1e-12)


def test_gauss_hermite_tables_are_read_only():
    knots, _ = gauss_hermite(8)
    with pytest.raises(ValueError):
        knots[0] = 1.0


def test_gauss_legendre_integrates_polynomials():
    knots, weights = gauss_legendre(0.0, 2.0, 5)
    assert weights @ knots ** 3 == pytest.approx(4.0, rel=1e-13)


def test_composite_legendre_covers_interval():
    knots, weights = composite_legendre(-3.0, 4.5, 10)
    assert len(knots) == 8 * 10
    assert weights.sum() == pytest.approx(7.5, rel=1e-13)
    assert weights @ np.exp(knots) == pytest.approx(np.exp(4.5) - np.exp(-3.0), rel=1e-12)


def test_composite_legendre_empty_interval():
    knots, weights = composite_legendre(1.0, 1.0, 10)
    assert len(knots) == 0 and len(weights) == 0


# --- signal prior -------------------------------------------------------------

@pytest.mark.parametrize("rho", RHO_GRID)
def test_signal_moments_match_oracle(rho):
    prior = SignalPrior(rho)
    for sigma2, T in itertools.product(SIGMA2_GRID, T_GRID):
        ch = ChannelMoment(sigma2, T)
        mean, var = oracle_posterior_moments(ch, prior)
        assert f_a(ch, prior) == pytest.approx(mean, abs=1e-8), (sigma2, T)
        assert f_c(ch, prior) == pytest.approx(var, abs=1e-8), (sigma2, T)


@pytest.mark.parametrize("rho", [0.1, 0.2, 0.5, 1.0])
@pytest.mark.parametrize("sigma2", [0.01, 0.1, 1.0, 10.0])
def test_signal_moments_match_oracle_on_dense_grid(sigma2, rho):
    prior = SignalPrior(rho)
    for T in np.arange(-24, 25) * 0.25:
        ch = ChannelMoment(sigma2, float(T))
        mean, var = oracle_posterior_moments(ch, prior)
        assert f_a(ch, prior) == pytest.approx(mean, abs=1e-8), T
        assert f_c(ch, prior) == pytest.approx(var, abs=1e-8), T


@pytest.mark.parametrize("rho", [0.1, 0.5, 1.0])
def test_variance_is_sigma2_times_mean_derivative(rho):
    prior = SignalPrior(rho)
    for sigma2, T in itertools.product([1e-2, 0.5, 1.0, 10.0], [-3.0, -0.5, 0.2, 1.5, 4.0]):
        h = 1e-5 * max(1.0, abs(T))
        slope = (f_a(ChannelMoment(sigma2, T + h), prior) - f_a(ChannelMoment(sigma2, T - h), prior)) / (2 * h)
        assert f_c(ChannelMoment(sigma2, T), prior) == pytest.approx(sigma2 * slope, rel=1e-5, abs=1e-14)


def test_pure_slab_is_gaussian_posterior():
    ch = ChannelMoment(0.5, 1.2)
    prior = SignalPrior(1.0)
    assert f_a(ch, prior) == pytest.approx(1.2 / 1.5)
    assert f_c(ch, prior) == pytest.approx(0.5 / 1.5)


def test_signal_moments_limits():
    prior = SignalPrior(0.2)
    # vanishing noise returns the observation, zero observation is the spike
    assert f_a(ChannelMoment(1e-12, 2.0), prior) == pytest.approx(2.0, rel=1e-9)
    assert f_a(ChannelMoment(1e-3, 0.0), prior) == 0.0
    # huge noise returns the prior mean and variance
    assert f_a(ChannelMoment(1e12, 3.0), prior) == pytest.approx(0.0, abs=1e-10)
    assert f_c(ChannelMoment(1e12, 3.0), prior) == pytest.approx(0.2, rel=1e-6)


def test_signal_moments_are_odd_and_even():
    prior = SignalPrior(0.3)
    for sigma2, T in itertools.product([0.1, 2.0], [0.4, 3.0]):
        assert f_a(ChannelMoment(sigma2, -T), prior) == pytest.approx(-f_a(ChannelMoment(sigma2, T), prior))
        assert f_c(ChannelMoment(sigma2, -T), prior) == pytest.approx(f_c(ChannelMoment(sigma2, T), prior))


def test_signal_moments_do_not_overflow():
    mean, var = spike_slab_moments(1e-14, np.array([-1e6, 1e6]), 0.01)
    assert np.all(np.isfinite(mean)) and np.all(np.isfinite(var))
    assert mean[1] == pytest.approx(1e6, rel=1e-9)


def test_vectorised_signal_moments_match_scalar():
    prior = SignalPrior(0.25)
    T = np.linspace(-4, 4, 17).reshape(1, 17)
    sigma2 = np.array([[0.1], [1.0], [5.0]])
    mean, var = spike_slab_moments(sigma2, T, prior.rho)
    assert mean.shape == (3, 17)
    for i, j in itertools.product(range(3), range(17)):
        ch = ChannelMoment(float(sigma2[i, 0]), float(T[0, j]))
        assert mean[i, j] == pytest.approx(f_a(ch, prior), rel=1e-13, abs=1e-300)
        assert var[i, j] == pytest.approx(f_c(ch, prior), rel=1e-13, abs=1e-300)


@pytest.mark.parametrize(
    "sigma2, T",
    [(0.0, 1.0), (-1.0, 1.0), (np.nan, 1.0), (1.0, np.inf), (1.0, np.nan)],
)
def test_invalid_channel_rejected(sigma2, T):
    with pytest.raises(InvalidArgumentError):
        f_a(ChannelMoment(sigma2, T), SignalPrior(0.5))


@pytest.mark.parametrize("rho", [0.0, -0.1, 1.5, np.nan])
def test_invalid_rho_rejected(rho):
    with pytest.raises(InvalidArgumentError):
        SignalPrior(rho)


# --- matrix prior -------------------------------------------------------------

@pytest.mark.parametrize("eta", [1e-4, 1e-2, 1.0, INFINITE])
def test_matrix_moments_match_oracle(eta):
    n = 64
    for sigma2, T, side in itertools.product([1e-3, 0.2, 1.0, 30.0], [-0.4, 0.0, 0.05, 0.3], [-1.5, 0.7]):
        prior = MatrixPrior(eta, side)
        ch = ChannelMoment(sigma2, T)
        mean, var = oracle_posterior_moments(ch, prior, n=n)
        assert f_r(ch, prior, n) == pytest.approx(mean, abs=1e-8)
        assert f_s(ch, prior, n) == pytest.approx(var, abs=1e-8)


def test_matrix_moments_closed_form():
    n, eta, side, sigma2, T = 100, 0.05, 1.3, 0.4, 0.12
    mu = side / (np.sqrt(n) * np.sqrt(1 + eta))
    expected_mean = (T + sigma2 * (1 + eta) / eta * mu) / ((1 + 1 / eta) * sigma2 + 1)
    expected_var = (1 / n) * sigma2 / ((1 + 1 / eta) * sigma2 + 1)
    prior = MatrixPrior(eta, side)
    ch = ChannelMoment(sigma2, T)
    assert f_r(ch, prior, n) == pytest.approx(expected_mean, rel=1e-12)
    assert f_s(ch, prior, n) == pytest.approx(expected_var, rel=1e-12)


def test_matrix_moments_without_side_information():
    ch = ChannelMoment(0.5, 0.3)
    prior = MatrixPrior(INFINITE)
    assert f_r(ch, prior, 10) == pytest.approx(0.3 / 1.5)
    assert f_s(ch, prior, 10) == pytest.approx(0.5 / 15.0)


def test_known_matrix_limit():
    n, side = 16, -0.8
    ch = ChannelMoment(2.0, 0.9)
    prior = MatrixPrior(0.0, side)
    assert f_r(ch, prior, n) == pytest.approx(side / np.sqrt(n))
    assert f_s(ch, prior, n) == 0.0


def test_matrix_moments_broadcast_side_values():
    side = np.array([[0.1, -0.2], [1.0, 2.0]])
    mean, var = matrix_moments(0.3, np.zeros((2, 2)), 0.1, side, 9)
    assert mean.shape == (2, 2) and var.shape == (2, 2)
    assert np.all(var == var[0, 0])


def test_matrix_prior_requires_side_value():
    with pytest.raises(InvalidArgumentError):
        MatrixPrior(0.1)
    with pytest.raises(InvalidArgumentError):
        MatrixPrior(0.1, np.nan)
    assert MatrixPrior("inf").eta is INFINITE


# --- oracle -------------------------------------------------------------------

def test_oracle_rejects_arrays():
    with pytest.raises(InvalidArgumentError):
        oracle_posterior_moments(ChannelMoment(1.0, np.zeros(3)), SignalPrior(0.5))


def test_oracle_reports_unconverged_quadrature():
    # the likelihood peak sits far outside the span of four nodes
    with pytest.raises(OracleFailureError):
        oracle_posterior_moments(ChannelMoment(1.0, 30.0), SignalPrior(0.5), nodes=4)

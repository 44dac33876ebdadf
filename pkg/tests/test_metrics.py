"""Tests for the error metrics and the dictionary gauge alignment."""

import itertools

import numpy as np
import pytest

from lib.errors import InvalidArgumentError
from lib.metrics import align_dictionary, align_signals, apply_alignment, mse_matrix, mse_signal


def brute_force_residual(fhat, f0):
    n = f0.shape[1]
    all_signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    best = np.inf
    for perm in itertools.permutations(range(n)):
        errs = np.mean(np.square(fhat[None, :, list(perm)] * all_signs[:, None, :] - f0[None]), axis=(1, 2))
        best = min(best, float(errs.min()))
    return best


def test_mse_signal():
    assert mse_signal(np.array([[1.0, 2.0]]), np.array([[0.0, 0.0]])) == pytest.approx(2.5)


def test_mse_matrix_uses_unscaled_elements():
    rng = np.random.default_rng(0)
    f0 = rng.standard_normal((5, 4))
    assert mse_matrix(f0 / 2.0, f0, 4) == 0.0
    assert mse_matrix(np.zeros((5, 4)), f0, 4) == pytest.approx(np.mean(f0 ** 2))


def test_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        mse_signal(np.zeros((2, 3)), np.zeros((3, 2)))
    with pytest.raises(InvalidArgumentError):
        mse_matrix(np.zeros((2, 3)), np.zeros((2, 2)), 3)
    with pytest.raises(InvalidArgumentError):
        align_dictionary(np.zeros((2, 3)), np.zeros((2, 2)))


def test_alignment_matches_exhaustive_search():
    rng = np.random.default_rng(2024)
    for case in range(100):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 6))
        f0 = rng.standard_normal((m, n))
        if case % 2:
            # a noisy, permuted, sign-flipped copy
            sigma = rng.permutation(n)
            fhat = f0[:, sigma] * rng.choice([-1.0, 1.0], size=n) + 0.3 * rng.standard_normal((m, n))
        else:
            fhat = rng.standard_normal((m, n))
        alignment = align_dictionary(fhat, f0)
        assert alignment.residual == pytest.approx(brute_force_residual(fhat, f0), rel=1e-12, abs=1e-15)
        assert sorted(alignment.perm) == list(range(n))
        assert set(alignment.signs) <= {-1, 1}


def test_alignment_undoes_known_gauge():
    rng = np.random.default_rng(7)
    f0 = rng.standard_normal((20, 6))
    x0 = rng.standard_normal((6, 9))
    perm = [3, 0, 5, 1, 4, 2]
    signs = np.array([1, -1, -1, 1, 1, -1])

    # fhat[:, perm[k]] = signs[k] f0[:, k] and rows of a follow the same map
    fhat = np.empty_like(f0)
    a = np.empty_like(x0)
    for k in range(6):
        fhat[:, perm[k]] = signs[k] * f0[:, k]
        a[perm[k], :] = signs[k] * x0[k, :]

    alignment = align_dictionary(fhat, f0)
    assert alignment.perm == tuple(perm)
    assert alignment.signs == tuple(int(s) for s in signs)
    assert alignment.residual == 0.0
    np.testing.assert_array_equal(apply_alignment(fhat, alignment), f0)
    np.testing.assert_array_equal(align_signals(a, alignment), x0)
    np.testing.assert_allclose(apply_alignment(fhat, alignment) @ align_signals(a, alignment), fhat @ a)


def test_zero_reference_column_is_degenerate():
    rng = np.random.default_rng(3)
    f0 = rng.standard_normal((8, 3))
    f0[:, 1] = 0.0
    fhat = f0[:, [2, 1, 0]].copy()
    alignment = align_dictionary(fhat, f0)
    assert alignment.degenerate == (1,)
    assert alignment.signs[1] == 1
    assert alignment.residual == pytest.approx(brute_force_residual(fhat, f0), abs=1e-15)


@pytest.mark.parametrize("dead", [(0, 3), (1, 2, 4), (0, 1, 2, 3, 4)])
def test_zero_reference_columns_take_leftover_estimates(dead):
    rng = np.random.default_rng(11)
    f0 = rng.standard_normal((6, 5))
    f0[:, list(dead)] = 0.0
    fhat = rng.standard_normal((6, 5))
    alignment = align_dictionary(fhat, f0)
    assert alignment.degenerate == dead
    assert sorted(alignment.perm) == list(range(5))
    live = [k for k in range(5) if k not in dead]
    leftover = sorted(set(range(5)) - {alignment.perm[k] for k in live})
    assert [alignment.perm[k] for k in dead] == leftover
    assert all(alignment.signs[k] == 1 for k in dead)
    assert alignment.residual == pytest.approx(brute_force_residual(fhat, f0), rel=1e-12, abs=1e-15)

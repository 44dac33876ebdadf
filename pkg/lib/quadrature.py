"""Quadrature rules for Gaussian averages.

All rules return (knots, weights) arrays. Gauss-Hermite rules integrate
against the standard normal density; Gauss-Legendre rules integrate
against dx on a finite interval.
"""

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _hermite_table(n: int):
    knots, weights = np.polynomial.hermite.hermgauss(n)
    knots = knots * np.sqrt(2)
    weights = weights / np.sqrt(np.pi)
    knots.setflags(write=False)
    weights.setflags(write=False)
    return knots, weights


@lru_cache(maxsize=32)
def _legendre_table(n: int):
    knots, weights = np.polynomial.legendre.leggauss(n)
    knots.setflags(write=False)
    weights.setflags(write=False)
    return knots, weights


def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Compute the Gauss-Hermite quadrature points and weights.

    Integration is with respect to the standard Gaussian density, so
    ``weights @ f(knots)`` approximates E[f(z)], z ~ N(0, 1).

    Parameters
    ----------
    n: int
        Number of quadrature points.

    Returns
    -------
    knots, weights: read-only arrays of length n
    """
    if n < 1:
        raise ValueError(f"number of nodes must be >= 1, got {n}")
    return _hermite_table(int(n))


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Compute the Gauss-Legendre quadrature points and weights on [a, b].
    """
    knots, weights = _legendre_table(int(n))
    knots_a_b = 0.5 * (b - a) * knots + 0.5 * (b + a)
    weights_a_b = 0.5 * (b - a) * weights
    return knots_a_b, weights_a_b


def composite_legendre(a: float, b: float, n: int, panel_width: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with n nodes on each panel of [a, b].

    The interval is split into ceil((b - a)/panel_width) equal panels, which
    keeps sharply peaked integrands resolved regardless of the interval length.
    """
    if b <= a:
        return np.zeros(0), np.zeros(0)
    panels = max(1, int(math.ceil((b - a) / panel_width)))
    edges = np.linspace(a, b, panels + 1)
    ref_knots, ref_weights = _legendre_table(int(n))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    knots = (mid[:, None] + half[:, None] * ref_knots[None, :]).ravel()
    weights = (half[:, None] * ref_weights[None, :]).ravel()
    return knots, weights


def normal_pdf(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)

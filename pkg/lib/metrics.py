"""Mean squared errors and the permutation/sign gauge of dictionary learning."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from lib.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def _check_shapes(name: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidArgumentError(f"{name}: shape mismatch {a.shape} vs {b.shape}")


def mse_signal(a: np.ndarray, x0: np.ndarray) -> float:
    """Signal MSE per component, (1/NP) sum (a - X0)^2."""
    a = np.asarray(a, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    _check_shapes("mse_signal", a, x0)
    return float(np.mean(np.square(a - x0)))


def mse_matrix(r: np.ndarray, f0: np.ndarray, n: int) -> float:
    """Dictionary MSE per unscaled element, (1/MN) sum (sqrt(N) r - F0)^2.

    Args:
        r: estimate of the scaled dictionary F0/sqrt(N)
        f0: the unscaled dictionary
        n: N, the number of columns
    """
    r = np.asarray(r, dtype=float)
    f0 = np.asarray(f0, dtype=float)
    _check_shapes("mse_matrix", r, f0)
    return float(np.mean(np.square(np.sqrt(n) * r - f0)))


@dataclass(frozen=True)
class Alignment:
    """Column gauge mapping an estimate onto the reference dictionary.

    The aligned estimate is aligned[:, k] = signs[k] * Fhat[:, perm[k]].

    Attributes:
        perm: perm[k] is the estimate column matched to reference column k
        signs: +1 or -1 per reference column
        residual: mean squared error of the aligned estimate
        degenerate: reference columns with zero norm (no orientation to match)
    """

    perm: Tuple[int, ...]
    signs: Tuple[int, ...]
    residual: float
    degenerate: Tuple[int, ...] = ()


def apply_alignment(fhat: np.ndarray, alignment: Alignment) -> np.ndarray:
    """Return the gauge-fixed dictionary estimate."""
    return np.asarray(fhat)[:, list(alignment.perm)] * np.asarray(alignment.signs, dtype=float)


def align_signals(a: np.ndarray, alignment: Alignment) -> np.ndarray:
    """Apply the dictionary gauge to the rows of a signal estimate."""
    return np.asarray(a)[list(alignment.perm), :] * np.asarray(alignment.signs, dtype=float)[:, None]


def align_dictionary(fhat: np.ndarray, f0: np.ndarray) -> Alignment:
    """Minimise the squared error over column permutations and signs.

    For each pair the best sign is that of the inner product. Every estimate
    column contributes |f_j|^2 once whatever its match, so only the reference
    columns with non-zero norm enter the assignment, with cost
    |g_k|^2 - 2|<f_j, g_k>|. Zero columns of F0 then take the leftover
    estimate columns in order with sign +1 and are reported as degenerate.

    Args:
        fhat: M x N estimate
        f0: M x N reference

    Returns:
        Alignment with the optimal permutation and signs
    """
    fhat = np.asarray(fhat, dtype=float)
    f0 = np.asarray(f0, dtype=float)
    _check_shapes("align_dictionary", fhat, f0)
    n = f0.shape[1]

    inner = fhat.T @ f0
    norms_ref = np.sum(np.square(f0), axis=0)
    live = np.flatnonzero(norms_ref > 0)
    dead = np.flatnonzero(norms_ref == 0)

    perm = np.empty(n, dtype=int)
    signs = np.ones(n, dtype=int)
    if len(live):
        cost = norms_ref[None, live] - 2.0 * np.abs(inner[:, live])
        rows, cols = linear_sum_assignment(cost)
        perm[live[cols]] = rows
        picked = inner[rows, live[cols]]
        signs[live[cols]] = np.where(picked < 0, -1, 1)
    else:
        rows = np.empty(0, dtype=int)
    if len(dead):
        perm[dead] = np.setdiff1d(np.arange(n), rows)
        logger.warning(f"align_dictionary: reference columns {dead.tolist()} are zero and carry no gauge")

    aligned = fhat[:, perm] * signs
    residual = float(np.mean(np.square(aligned - f0)))
    return Alignment(
        perm=tuple(int(j) for j in perm),
        signs=tuple(int(s) for s in signs),
        residual=residual,
        degenerate=tuple(int(k) for k in dead),
    )

"""Finite-N message passing for blind calibration and dictionary learning.

One sweep updates, in order:

    overlines   a2_l = <a^2>_l, c_l = <v>_l, r2 = sum r^2 / M, s = sum s / M,
                res_l = <(Y - omega)^2>_l
    omega       r a - (Y - omega)/res_l * (c_l r2 + a2_l s)
    Sigma_R^2   res'_l/(alpha r2)
    Sigma_S^2   1/(pi w),  w = <a2_l/res'_l>
    R           a (1 - s/r2) + r^T (Y - omega)/(alpha r2)
    S           r (1 - <c_l/res'_l>/w) + ((Y - omega)/res'_l) a^T/(N pi w)
    a, v        f_a, f_c at (Sigma_R^2, R)
    r, s        f_r, f_s at (Sigma_S^2, S)

where l runs over the P signals and res' is the residual after the omega
update. With pooled_variance the signal averages are taken over the whole
matrix, a2, c and res become scalars and the sweep reduces to

    Sigma_R^2 = res'/(alpha r2),  Sigma_S^2 = res'/(pi a2),
    S = r (1 - c/a2) + (Y - omega) a^T/(N pi a2).

The overlines always come from the state entering the sweep, and only
(a, v, r, s) are damped.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Union

import numpy as np

from lib.denoisers import matrix_moments, spike_slab_moments
from lib.errors import AmpDivergenceError, InvalidArgumentError
from lib.instance.generator import FieldTag, ProblemInstance, substream
from lib.metrics import Alignment, align_dictionary, align_signals, mse_matrix, mse_signal
from lib.params import DELTA_FLOOR, INFINITE, AmpMode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AmpOptions:
    """Run options of the message-passing engine.

    Attributes:
        damping: weight of the new values in the convex update, in (0, 1]
        max_iter: maximum number of sweeps
        conv_tol: stop when max |a_new - a_old| falls below this
        init_jitter: relative scale of the symmetry-breaking initial noise
        delta_floor: floor applied to the residual and to a2, r2
        mode: CALIBRATION or DICTIONARY; derived from eta when None
        jitter_seed: seed of the initial noise; the instance seed when None
        pooled_variance: average the signal-side variances and the residual
            over all P signals instead of per signal
    """

    damping: float = 0.5
    max_iter: int = 200
    conv_tol: float = 1e-8
    init_jitter: float = 0.1
    delta_floor: float = DELTA_FLOOR
    mode: Optional[AmpMode] = None
    jitter_seed: Optional[int] = None
    pooled_variance: bool = False

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise InvalidArgumentError(f"damping must be in (0, 1], got {self.damping}")
        if self.max_iter < 0:
            raise InvalidArgumentError(f"max_iter must be >= 0, got {self.max_iter}")
        if not self.conv_tol > 0:
            raise InvalidArgumentError(f"conv_tol must be > 0, got {self.conv_tol}")
        if not self.init_jitter >= 0:
            raise InvalidArgumentError(f"init_jitter must be >= 0, got {self.init_jitter}")
        if not self.delta_floor > 0:
            raise InvalidArgumentError(f"delta_floor must be > 0, got {self.delta_floor}")

    def resolve_mode(self, inst: ProblemInstance) -> AmpMode:
        mode = self.mode or inst.params.mode
        if mode is AmpMode.CALIBRATION and inst.Fprime is None:
            raise InvalidArgumentError("CALIBRATION mode needs side information F', which this instance lacks")
        return mode


@dataclass(frozen=True)
class Overlines:
    """The averages of one sweep (after flooring).

    a2, c and res hold one value per signal (shape (P,)), or scalars when the
    variances are pooled; r2 and s are always scalars.
    """

    a2: Union[float, np.ndarray]
    c: Union[float, np.ndarray]
    r2: float
    s: float
    res: Union[float, np.ndarray]


@dataclass
class AmpState:
    """Means and variances of one message-passing run.

    Attributes:
        a, v: N x P signal means and variances
        r, s: M x N means and variances of the scaled dictionary F/sqrt(N)
        omega: M x P residual field
        t: number of completed sweeps
        overlines: averages used by the last sweep (None before the first)
        clamp_count: number of variances clamped at zero so far
    """

    a: np.ndarray
    v: np.ndarray
    r: np.ndarray
    s: np.ndarray
    omega: np.ndarray
    t: int = 0
    overlines: Optional[Overlines] = None
    clamp_count: int = 0

    def copy(self) -> "AmpState":
        return replace(
            self,
            a=self.a.copy(), v=self.v.copy(), r=self.r.copy(), s=self.s.copy(), omega=self.omega.copy(),
        )


@dataclass(frozen=True)
class AmpFields:
    """Intermediate quantities of one sweep, before the denoisers."""

    omega: np.ndarray
    res: Union[float, np.ndarray]
    sigma_r2: Union[float, np.ndarray]
    sigma_s2: float
    R: np.ndarray
    S: np.ndarray
    overlines: Overlines


@dataclass(frozen=True)
class TrajectoryPoint:
    t: int
    E: float
    D: float
    residual: float


@dataclass
class AmpResult:
    """Outcome of run_amp.

    Attributes:
        a, r: final signal and scaled-dictionary estimates (not gauge fixed)
        trajectory: one point per recorded state, iterations + 1 in total
        converged: whether the stopping rule on a was met
        iterations: number of completed sweeps
        alignment: dictionary gauge used for the metrics in DICTIONARY mode
        clamp_count: variances clamped at zero during the run
        damping: damping in effect at the end of the run
    """

    a: np.ndarray
    r: np.ndarray
    trajectory: List[TrajectoryPoint]
    converged: bool
    iterations: int
    alignment: Optional[Alignment] = None
    clamp_count: int = 0
    damping: float = 0.5

    @property
    def final(self) -> TrajectoryPoint:
        return self.trajectory[-1]


def init_state(inst: ProblemInstance, opts: AmpOptions) -> AmpState:
    """Start from the prior means and variances.

    The signal means get iid Gaussian jitter of standard deviation
    init_jitter * sqrt(rho), and in DICTIONARY mode the dictionary means get
    jitter of standard deviation init_jitter / sqrt(N); a zero start is a
    fixed point of the sweep.
    """
    mode = opts.resolve_mode(inst)
    n, m, p = inst.N, inst.M, inst.P
    rho = inst.params.rho
    seed = inst.seed if opts.jitter_seed is None else opts.jitter_seed
    rng = substream(seed, FieldTag.JITTER)

    a = opts.init_jitter * np.sqrt(rho) * rng.standard_normal((n, p))
    v = np.full((n, p), rho)
    if mode is AmpMode.CALIBRATION:
        eta = inst.params.eta
        r = inst.Fprime / (np.sqrt(n) * np.sqrt(1.0 + eta))
        s = np.full((m, n), eta / (n * (1.0 + eta)))
    else:
        r = opts.init_jitter * rng.standard_normal((m, n)) / np.sqrt(n)
        s = np.full((m, n), 1.0 / n)
    return AmpState(a=a, v=v, r=r, s=s, omega=inst.Y.copy())


def _signal_mean(x: np.ndarray, opts: AmpOptions) -> Union[float, np.ndarray]:
    if opts.pooled_variance:
        return float(np.mean(x))
    return np.mean(x, axis=0)


def compute_overlines(state: AmpState, inst: ProblemInstance, opts: AmpOptions) -> Overlines:
    n = inst.N
    floor = opts.delta_floor
    return Overlines(
        a2=np.maximum(_signal_mean(np.square(state.a), opts), floor),
        c=_signal_mean(state.v, opts),
        r2=max(n * float(np.mean(np.square(state.r))), floor),
        s=n * float(np.mean(state.s)),
        res=np.maximum(_signal_mean(np.square(inst.Y - state.omega), opts), floor),
    )


def compute_fields(state: AmpState, inst: ProblemInstance, opts: AmpOptions) -> AmpFields:
    """Residual field, effective channel variances and pseudo-observations.

    Per-signal arrays of shape (P,) broadcast against the columns of the
    M x P and N x P matrices.
    """
    n, m, p = inst.N, inst.M, inst.P
    alpha = m / n
    pi = p / n
    ov = compute_overlines(state, inst, opts)

    onsager = (ov.c * ov.r2 + ov.a2 * ov.s) / ov.res
    omega = state.r @ state.a - (inst.Y - state.omega) * onsager
    residual = inst.Y - omega
    res = np.maximum(_signal_mean(np.square(residual), opts), opts.delta_floor)

    # dictionary-channel precision per unit pi
    w = max(float(np.mean(ov.a2 / res)), opts.delta_floor)
    sigma_r2 = res / (alpha * ov.r2)
    sigma_s2 = 1.0 / (pi * w)
    R = state.a * (1.0 - ov.s / ov.r2) + (state.r.T @ residual) / (alpha * ov.r2)
    S = state.r * (1.0 - float(np.mean(ov.c / res)) / w) + ((residual / res) @ state.a.T) / (n * pi * w)
    return AmpFields(omega=omega, res=res, sigma_r2=sigma_r2, sigma_s2=sigma_s2, R=R, S=S, overlines=ov)


def _all_finite(*arrays) -> bool:
    return all(np.all(np.isfinite(x)) for x in arrays)


def amp_iterate(state: AmpState, inst: ProblemInstance, opts: AmpOptions) -> AmpState:
    """One damped sweep; returns a new state.

    Raises:
        AmpDivergenceError: if any field or estimate becomes non-finite
    """
    iteration = state.t + 1
    mode = opts.resolve_mode(inst)
    fields = compute_fields(state, inst, opts)
    if not _all_finite(fields.omega, fields.R, fields.S, fields.sigma_r2, fields.sigma_s2):
        raise AmpDivergenceError(f"non-finite fields at sweep {iteration}", iteration=iteration)

    a_new, v_new = spike_slab_moments(fields.sigma_r2, fields.R, inst.params.rho)
    if mode is AmpMode.CALIBRATION:
        r_new, s_new = matrix_moments(fields.sigma_s2, fields.S, inst.params.eta, inst.Fprime, inst.N)
    else:
        r_new, s_new = matrix_moments(fields.sigma_s2, fields.S, INFINITE, None, inst.N)
    if not _all_finite(a_new, v_new, r_new, s_new):
        raise AmpDivergenceError(f"non-finite estimates at sweep {iteration}", iteration=iteration)

    clamped = int(np.count_nonzero(v_new < 0) + np.count_nonzero(s_new < 0))
    if clamped:
        v_new = np.maximum(v_new, 0.0)
        s_new = np.maximum(s_new, 0.0)

    d = opts.damping
    return AmpState(
        a=d * a_new + (1.0 - d) * state.a,
        v=d * v_new + (1.0 - d) * state.v,
        r=d * r_new + (1.0 - d) * state.r,
        s=d * s_new + (1.0 - d) * state.s,
        omega=fields.omega,
        t=iteration,
        overlines=fields.overlines,
        clamp_count=state.clamp_count + clamped,
    )


def measure(state: AmpState, inst: ProblemInstance, mode: AmpMode) -> tuple[TrajectoryPoint, Optional[Alignment]]:
    """Signal and dictionary MSE of a state, gauge fixed in DICTIONARY mode."""
    residual = float(np.mean(np.square(inst.Y - state.r @ state.a)))
    if mode is AmpMode.DICTIONARY:
        alignment = align_dictionary(np.sqrt(inst.N) * state.r, inst.F0)
        E = mse_signal(align_signals(state.a, alignment), inst.X0)
        D = alignment.residual
    else:
        alignment = None
        E = mse_signal(state.a, inst.X0)
        D = mse_matrix(state.r, inst.F0, inst.N)
    return TrajectoryPoint(t=state.t, E=E, D=D, residual=residual), alignment


def run_amp(inst: ProblemInstance, opts: AmpOptions, state: Optional[AmpState] = None) -> AmpResult:
    """Iterate until max |a_new - a_old| < conv_tol or max_iter sweeps.

    On the first non-finite sweep the damping is halved and the sweep retried
    from the last finite state; a second failure is raised.

    Args:
        inst: problem instance (ground truth is used only for the metrics)
        opts: run options
        state: initial state; init_state(inst, opts) when None

    Raises:
        AmpDivergenceError: carrying the sweep index and the partial trajectory
    """
    mode = opts.resolve_mode(inst)
    if state is None:
        state = init_state(inst, opts)
    point, alignment = measure(state, inst, mode)
    trajectory = [point]
    logger.info(
        f"[AMP] start mode={mode} N={inst.N} M={inst.M} P={inst.P} "
        f"E0={point.E:.4e} D0={point.D:.4e} damping={opts.damping}"
    )

    converged = False
    retried = False
    sweeps = 0
    while sweeps < opts.max_iter:
        try:
            new_state = amp_iterate(state, inst, opts)
        except AmpDivergenceError as err:
            if retried:
                logger.error(f"[AMP] diverged again at sweep {err.iteration}")
                raise AmpDivergenceError(str(err), iteration=err.iteration, trajectory=trajectory) from err
            retried = True
            opts = replace(opts, damping=opts.damping / 2)
            logger.warning(f"[AMP] {err}; retrying with damping {opts.damping}")
            continue

        change = float(np.max(np.abs(new_state.a - state.a)))
        state = new_state
        sweeps += 1
        point, alignment = measure(state, inst, mode)
        trajectory.append(point)
        logger.debug(f"[AMP] t={point.t} E={point.E:.6e} D={point.D:.6e} residual={point.residual:.6e} change={change:.3e}")
        if change < opts.conv_tol:
            converged = True
            break

    if state.clamp_count and converged:
        logger.warning(f"[AMP] {state.clamp_count} variances were clamped at zero")
    logger.info(
        f"[AMP] {'converged' if converged else 'stopped'} after {sweeps} sweeps: "
        f"E={trajectory[-1].E:.4e} D={trajectory[-1].D:.4e}"
    )
    return AmpResult(
        a=state.a,
        r=state.r,
        trajectory=trajectory,
        converged=converged,
        iterations=sweeps,
        alignment=alignment,
        clamp_count=state.clamp_count,
        damping=opts.damping,
    )

"""Bayes-optimal MMSE and the phase boundaries in pi.

    pi*   exact-recovery threshold alpha/(alpha - rho), independent of eta
    pi^s  spinodal: above it state evolution started from the uninformative
          point reaches the exact-recovery fixed point

Cells of a phase diagram are tagged IMPOSSIBLE (pi <= pi*), HARD
(pi* < pi < pi^s), TRACTABLE (pi >= pi^s) or FAILED (the cell raised).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from lib.errors import InvalidArgumentError, MfampError, ScanError
from lib.params import DELTA_FLOOR, Eta, ModelParams, floored_delta
from lib.parallel import run_cells
from lib.theory.channels import DEFAULT_NODES, SePoint
from lib.theory.potential import potential_grid
from lib.theory.state_evolution import (
    SE_MAX_STEPS,
    FixedPoint,
    SeStart,
    collect_fixed_points,
    run_se,
    se_fixed_points,
)

logger = logging.getLogger(__name__)

PHI_TIE_TOL = 1e-9
GRID_MARGIN = 1e-6
GRID_SIZE = 40
REFINE_CELLS = 3

PI_MAX = 20.0
SPINODAL_TOL = 1e-3
SPINODAL_SAMPLES = 8
# the scan starts this far (relatively) above pi*, where SE still converges in SE_MAX_STEPS
SPINODAL_OFFSET = 0.02
# E at or below this counts as exact recovery
RECOVERY_TOL = 1e-8


class PhaseTag(Enum):
    IMPOSSIBLE = "IMPOSSIBLE"
    HARD = "HARD"
    TRACTABLE = "TRACTABLE"
    FAILED = "FAILED"

    def __str__(self) -> str:
        return self.value


class SpinodalOutcome(Enum):
    FOUND = "found"
    NO_HARD_PHASE = "no_hard_phase"
    NO_RECOVERY = "no_recovery"
    NO_THRESHOLD = "no_threshold"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MmseResult:
    """The Bayes-optimal point and the candidates it was chosen from."""

    E: float
    D: float
    phi: float
    candidates: Tuple[FixedPoint, ...]
    refined: bool = False


@dataclass(frozen=True)
class CurvePoint:
    pi: float
    E: float
    D: float
    phi: float
    tag: PhaseTag


@dataclass
class PhaseRecord:
    """Phase boundaries and MMSE samples for one (alpha, rho, eta, delta)."""

    alpha: float
    rho: float
    eta: Eta
    delta: float
    pi_star: Optional[float]
    pi_spinodal: Optional[float]
    curve: List[CurvePoint] = field(default_factory=list)
    spinodal_outcome: Optional[SpinodalOutcome] = None


def recovery_threshold(delta: float, delta_floor: float = DELTA_FLOOR) -> float:
    return max(10.0 * floored_delta(delta, delta_floor), RECOVERY_TOL)


def pi_star(alpha: float, rho: float) -> Optional[float]:
    """Exact-recovery threshold alpha/(alpha - rho), or None when alpha <= rho."""
    if alpha <= 0 or not 0 < rho <= 1:
        raise InvalidArgumentError(f"need alpha > 0 and rho in (0, 1], got alpha={alpha}, rho={rho}")
    if alpha <= rho:
        return None
    return alpha / (alpha - rho)


def _pick_best(candidates: Sequence[FixedPoint]) -> FixedPoint:
    best = candidates[0]
    for fp in candidates[1:]:
        if fp.phi > best.phi + PHI_TIE_TOL:
            best = fp
        elif abs(fp.phi - best.phi) <= PHI_TIE_TOL and fp.point.E < best.point.E:
            best = fp
    return best


def _choose(candidates: Sequence[FixedPoint], params: ModelParams, delta_floor: float) -> FixedPoint:
    """Pick the Bayes-optimal candidate.

    Without noise Phi at exact recovery carries 0.5 (alpha - rho - alpha/pi)
    log(1/delta), which the floored delta cuts off. The sign of that
    coefficient decides: above pi* the exact-recovery point wins whenever it
    was reached, at or below pi* it loses to any other candidate.
    """
    if params.delta > 0:
        return _pick_best(candidates)
    limit = recovery_threshold(0.0, delta_floor)
    exact = [fp for fp in candidates if fp.point.E <= limit]
    other = [fp for fp in candidates if fp.point.E > limit]
    threshold = pi_star(params.alpha, params.rho)
    if exact and threshold is not None and params.pi > threshold:
        return _pick_best(exact)
    if other:
        return _pick_best([fp for fp in other if fp.converged] or other)
    return _pick_best(candidates)


def mmse(
    params: ModelParams,
    nodes: int = DEFAULT_NODES,
    grid_size: int = GRID_SIZE,
    delta_floor: float = DELTA_FLOOR,
) -> MmseResult:
    """Bayes-optimal (E*, D*, Phi*): the SE fixed point with the largest Phi.

    Fixed points come from the two canonical starts. Phi is also evaluated on
    a log-spaced grid; when grid cells beat every candidate by more than
    1e-6, state evolution is restarted from the best such cells and the
    fixed points it reaches join the candidates. Ties within 1e-9 go to the
    smaller E. At delta = 0 the exact-recovery candidate is chosen exactly
    when pi > pi*; the reported Phi is the value at the floored delta.
    """
    candidates = se_fixed_points(params, nodes, delta_floor)
    refined = False

    if grid_size > 0:
        e_values, d_values, phi = potential_grid(params, grid_size, nodes=nodes, delta_floor=delta_floor)
        best_phi = max(fp.phi for fp in candidates)
        above = np.argwhere(phi > best_phi + GRID_MARGIN)
        if len(above):
            order = np.argsort(-phi[above[:, 0], above[:, 1]])[:REFINE_CELLS]
            starts = [SePoint(float(e_values[i]), float(d_values[j])) for i, j in above[order]]
            logger.debug(f"[PHASE] grid exceeds candidates in {len(above)} cells; refining from {starts}")
            runs = [run_se(params, start, nodes=nodes, delta_floor=delta_floor) for start in starts]
            extra = collect_fixed_points(runs, params, nodes, delta_floor)
            merged = list(candidates)
            for fp in extra:
                if not any(abs(fp.point.E - c.point.E) <= 1e-9 and abs(fp.point.D - c.point.D) <= 1e-9 for c in merged):
                    merged.append(fp)
            candidates = merged
            refined = True

    best = _choose(candidates, params, delta_floor)
    return MmseResult(best.point.E, best.point.D, best.phi, tuple(candidates), refined)


def _recovers(params: ModelParams, nodes: int, delta_floor: float, max_steps: int) -> bool:
    traj = run_se(params, SeStart.UNINFORMATIVE, nodes=nodes, max_steps=max_steps, delta_floor=delta_floor)
    return traj.fixed_point.E <= recovery_threshold(params.delta, delta_floor)


def spinodal_scan(
    alpha: float,
    rho: float,
    eta: Eta,
    delta: float,
    tol: float = SPINODAL_TOL,
    pi_max: float = PI_MAX,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
    max_steps: int = SE_MAX_STEPS,
) -> Tuple[Optional[float], SpinodalOutcome]:
    """Locate pi^s by bisection and report why it may be absent.

    Raises:
        ScanError: if the recovery predicate is not monotone over the bracket
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be > 0, got {tol}")
    threshold = pi_star(alpha, rho)
    if threshold is None:
        return None, SpinodalOutcome.NO_THRESHOLD
    lo = threshold * (1.0 + SPINODAL_OFFSET)
    if lo >= pi_max:
        return None, SpinodalOutcome.NO_RECOVERY

    base = ModelParams(alpha=alpha, pi=lo, rho=rho, delta=delta, eta=eta)

    def predicate(pi: float) -> bool:
        return _recovers(base.with_pi(pi), nodes, delta_floor, max_steps)

    grid = np.linspace(lo, pi_max, SPINODAL_SAMPLES)
    samples = [(float(pi), predicate(float(pi))) for pi in grid]
    flags = [ok for _, ok in samples]
    first_true = flags.index(True) if True in flags else None
    if first_true is not None and not all(flags[first_true:]):
        raise ScanError(f"recovery is not monotone in pi for alpha={alpha}, rho={rho}, eta={eta}", samples)

    if first_true is None:
        logger.info(f"[PHASE] no recovery up to pi_max={pi_max} (alpha={alpha}, rho={rho}, eta={eta})")
        return None, SpinodalOutcome.NO_RECOVERY
    if first_true == 0:
        return None, SpinodalOutcome.NO_HARD_PHASE

    low, high = samples[first_true - 1][0], samples[first_true][0]
    while high - low > tol:
        mid = 0.5 * (low + high)
        if predicate(mid):
            high = mid
        else:
            low = mid
    value = 0.5 * (low + high)
    logger.debug(f"[PHASE] spinodal pi={value:.6f} (alpha={alpha}, rho={rho}, eta={eta})")
    return value, SpinodalOutcome.FOUND


def spinodal_pi(
    alpha: float,
    rho: float,
    eta: Eta,
    delta: float,
    tol: float = SPINODAL_TOL,
    pi_max: float = PI_MAX,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
) -> Optional[float]:
    """Spinodal pi^s within tol, or None.

    None means there is no exact-recovery threshold, no hard phase above
    pi*, or no recovery from the uninformative start up to pi_max.
    """
    value, _ = spinodal_scan(alpha, rho, eta, delta, tol, pi_max, nodes, delta_floor)
    return value


def phase_tag(pi: float, threshold: Optional[float], spinodal: Optional[float], outcome: Optional[SpinodalOutcome]) -> PhaseTag:
    if threshold is None or pi <= threshold:
        return PhaseTag.IMPOSSIBLE
    if outcome is SpinodalOutcome.NO_RECOVERY:
        return PhaseTag.HARD
    if spinodal is not None and pi < spinodal:
        return PhaseTag.HARD
    return PhaseTag.TRACTABLE


def mmse_curve(
    params: ModelParams,
    pi_grid: Sequence[float],
    nodes: int = DEFAULT_NODES,
    grid_size: int = GRID_SIZE,
    delta_floor: float = DELTA_FLOOR,
) -> List[CurvePoint]:
    """MMSE versus pi. Cells are tagged from the fixed point the uninformative start reaches."""
    threshold = pi_star(params.alpha, params.rho)
    limit = recovery_threshold(params.delta, delta_floor)

    def cell(pi: float) -> CurvePoint:
        cell_params = params.with_pi(pi)
        try:
            result = mmse(cell_params, nodes, grid_size, delta_floor)
        except MfampError as err:
            logger.warning(f"[PHASE] cell pi={pi} failed: {err}")
            return CurvePoint(pi, math.nan, math.nan, math.nan, PhaseTag.FAILED)
        if threshold is None or pi <= threshold:
            tag = PhaseTag.IMPOSSIBLE
        else:
            reached = [fp for fp in result.candidates if "uninformative" in fp.basin.split("+")]
            tag = PhaseTag.TRACTABLE if reached and reached[0].point.E <= limit else PhaseTag.HARD
        return CurvePoint(pi, result.E, result.D, result.phi, tag)

    return run_cells(cell, list(pi_grid))


def phase_diagram(
    alpha: float,
    delta: float,
    eta: Eta,
    rho_grid: Sequence[float],
    pi_grid: Sequence[float],
    tol: float = SPINODAL_TOL,
    pi_max: float = PI_MAX,
    nodes: int = DEFAULT_NODES,
    grid_size: int = GRID_SIZE,
    delta_floor: float = DELTA_FLOOR,
) -> List[PhaseRecord]:
    """pi*, pi^s and tagged MMSE samples for every rho, in grid order.

    A cell that raises is tagged FAILED instead of aborting the sweep.
    """
    if not len(rho_grid) or not len(pi_grid):
        raise InvalidArgumentError("rho and pi grids must be non-empty")

    def boundaries(rho: float):
        try:
            return spinodal_scan(alpha, rho, eta, delta, tol, pi_max, nodes, delta_floor), None
        except MfampError as err:
            logger.warning(f"[PHASE] spinodal scan failed for rho={rho}: {err}")
            return (None, None), err

    scans = run_cells(boundaries, list(rho_grid))
    records = []
    cells = []
    for rho, ((spinodal, outcome), error) in zip(rho_grid, scans):
        threshold = pi_star(alpha, rho)
        record = PhaseRecord(alpha, rho, eta, delta, threshold, spinodal, spinodal_outcome=outcome)
        records.append(record)
        for pi in pi_grid:
            cells.append((record, pi, error))

    def cell(item) -> CurvePoint:
        record, pi, error = item
        if error is not None and record.pi_star is not None and pi > record.pi_star:
            return CurvePoint(pi, math.nan, math.nan, math.nan, PhaseTag.FAILED)
        try:
            params = ModelParams(alpha=alpha, pi=pi, rho=record.rho, delta=delta, eta=eta)
            result = mmse(params, nodes, grid_size, delta_floor)
        except MfampError as err:
            logger.warning(f"[PHASE] cell rho={record.rho} pi={pi} failed: {err}")
            return CurvePoint(pi, math.nan, math.nan, math.nan, PhaseTag.FAILED)
        tag = phase_tag(pi, record.pi_star, record.pi_spinodal, record.spinodal_outcome)
        return CurvePoint(pi, result.E, result.D, result.phi, tag)

    for (record, _, _), point in zip(cells, run_cells(cell, cells)):
        record.curve.append(point)
    logger.info(f"[PHASE] swept {len(records)} rho values x {len(pi_grid)} pi values")
    return records

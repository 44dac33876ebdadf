"""State evolution of the order parameters (E, D).

    E' = mmse of the spike-slab prior through a Gaussian channel of precision m_hat_x
    D' = 1/(m_hat_F + (1 + eta)/eta)

with (m_hat_x, m_hat_F) = hat_params(E, D). Fixed points of this map are
the stationary points of the replica potential.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

from lib.errors import InvalidArgumentError
from lib.params import DELTA_FLOOR, ModelParams, is_infinite
from lib.theory.channels import (
    DEFAULT_NODES,
    SePoint,
    channel_mmse,
    hat_params,
    matrix_mse,
)
from lib.theory.potential import check_stationary, potential

logger = logging.getLogger(__name__)

SE_TOL = 1e-12
SE_MAX_STEPS = 10_000
INFORMED_EPSILON = 1e-10
OSCILLATION_DAMPING = 0.5
DEDUP_TOL = 1e-9

# (rho, 1) is itself a fixed point when eta is INFINITE
SYMMETRY_BREAK = 1e-6


class SeStart(Enum):
    UNINFORMATIVE = "uninformative"
    INFORMED = "informed"

    def __str__(self) -> str:
        return self.value


@dataclass
class SeTrajectory:
    """A state-evolution run.

    Attributes:
        points: visited points, starting with the initial one
        hats: (m_hat_x, m_hat_F) evaluated at each point of `points` but the last
        converged: whether the relative change fell below the tolerance
        fixed_point: last point of the run
        start: label of the starting point
        damping: damping in effect at the end (weight kept from the old point)
        oscillating: whether alternating steps were detected
    """

    points: List[SePoint]
    hats: List[Tuple[float, float]]
    converged: bool
    start: str
    damping: float = 0.0
    oscillating: bool = False

    @property
    def fixed_point(self) -> SePoint:
        return self.points[-1]

    @property
    def steps(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True)
class FixedPoint:
    """A fixed point with its potential value and the starts that reached it."""

    point: SePoint
    phi: float
    basin: str
    converged: bool = True
    gradient: Optional[float] = None


def se_step(
    p: SePoint,
    params: ModelParams,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
) -> SePoint:
    """Apply the state-evolution map once."""
    m_x, m_f = hat_params(p, params, delta_floor)
    E = channel_mmse(max(m_x, 0.0), params.rho, nodes)
    D = matrix_mse(max(m_f, 0.0), params.eta)
    return SePoint(E=E, D=D)


def start_point(params: ModelParams, init: Union[SeStart, SePoint], epsilon: float = INFORMED_EPSILON) -> Tuple[SePoint, str]:
    if isinstance(init, SePoint):
        return init, "custom"
    if init is SeStart.INFORMED:
        return SePoint(epsilon, epsilon), str(init)
    if init is SeStart.UNINFORMATIVE:
        d0 = 1.0 - SYMMETRY_BREAK if is_infinite(params.eta) else 1.0
        return SePoint(params.rho, d0), str(init)
    raise InvalidArgumentError(f"unknown start {init!r}")


def _relative_change(old: SePoint, new: SePoint, floor: float) -> float:
    return max(
        abs(new.E - old.E) / max(new.E, floor),
        abs(new.D - old.D) / max(new.D, floor),
    )


def run_se(
    params: ModelParams,
    init: Union[SeStart, SePoint] = SeStart.UNINFORMATIVE,
    epsilon: float = INFORMED_EPSILON,
    nodes: int = DEFAULT_NODES,
    tol: float = SE_TOL,
    max_steps: int = SE_MAX_STEPS,
    damping: float = 0.0,
    delta_floor: float = DELTA_FLOOR,
) -> SeTrajectory:
    """Iterate se_step until the relative change is below tol.

    Damping is the weight kept from the previous point (0 is plain
    iteration). If the last five E updates alternate in sign (four sign
    flips in a row) the damping is switched to 0.5.

    Args:
        params: model parameters
        init: UNINFORMATIVE (rho, 1), INFORMED (epsilon, epsilon) or a SePoint
        epsilon: size of the informed start
        nodes: quadrature nodes
        tol: relative convergence tolerance
        max_steps: iteration cap

    Returns:
        SeTrajectory; runs hitting max_steps are returned with converged=False
    """
    if not 0 <= damping < 1:
        raise InvalidArgumentError(f"SE damping must be in [0, 1), got {damping}")
    point, label = start_point(params, init, epsilon)
    points = [point]
    hats: List[Tuple[float, float]] = []
    converged = False
    oscillating = False
    signs: List[int] = []

    for step in range(max_steps):
        hats.append(hat_params(point, params, delta_floor))
        new = se_step(point, params, nodes, delta_floor)
        if damping > 0:
            new = SePoint(
                E=(1.0 - damping) * new.E + damping * point.E,
                D=(1.0 - damping) * new.D + damping * point.D,
            )
        change = _relative_change(point, new, delta_floor)

        diff = new.E - point.E
        if diff != 0:
            signs.append(1 if diff > 0 else -1)
            signs = signs[-5:]
            if damping == 0 and len(signs) == 5 and all(signs[i] != signs[i + 1] for i in range(4)):
                oscillating = True
                damping = OSCILLATION_DAMPING
                logger.info(f"[SE] oscillation detected at step {step}, damping set to {damping}")

        points.append(new)
        point = new
        if change < tol:
            converged = True
            break

    if not converged:
        logger.info(
            f"[SE] {label} start did not converge in {max_steps} steps "
            f"(E={point.E:.4e}, D={point.D:.4e}, params={params.as_dict()})"
        )
    else:
        logger.debug(f"[SE] {label} start converged in {len(points) - 1} steps to E={point.E:.6e}, D={point.D:.6e}")
    return SeTrajectory(
        points=points,
        hats=hats,
        converged=converged,
        start=label,
        damping=damping,
        oscillating=oscillating,
    )


def _same_point(a: SePoint, b: SePoint, tol: float = DEDUP_TOL) -> bool:
    return abs(a.E - b.E) <= tol and abs(a.D - b.D) <= tol


def collect_fixed_points(
    trajectories: List[SeTrajectory],
    params: ModelParams,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
    check: bool = True,
) -> List[FixedPoint]:
    """Deduplicate the end points of several runs and attach Phi.

    Converged end points are checked for stationarity of Phi.

    Raises:
        ConsistencyError: if a converged end point is not stationary
    """
    found: List[FixedPoint] = []
    for traj in trajectories:
        end = traj.fixed_point
        for i, fp in enumerate(found):
            if _same_point(fp.point, end):
                found[i] = FixedPoint(
                    point=fp.point,
                    phi=fp.phi,
                    basin=f"{fp.basin}+{traj.start}",
                    converged=fp.converged or traj.converged,
                    gradient=fp.gradient,
                )
                break
        else:
            gradient = None
            if check and traj.converged:
                gradient = check_stationary(end, params, nodes, delta_floor)
            phi = potential(end.E, end.D, params, nodes, delta_floor)
            found.append(FixedPoint(end, phi, traj.start, traj.converged, gradient))
    return found


def se_fixed_points(
    params: ModelParams,
    nodes: int = DEFAULT_NODES,
    delta_floor: float = DELTA_FLOOR,
    max_steps: int = SE_MAX_STEPS,
) -> List[FixedPoint]:
    """Fixed points reached from the uninformative and informed starts.

    Returns:
        deduplicated fixed points with Phi and basin tags ("uninformative",
        "informed" or both joined by "+")

    Raises:
        ConsistencyError: if a converged fixed point fails the stationarity check
    """
    runs = [
        run_se(params, SeStart.UNINFORMATIVE, nodes=nodes, max_steps=max_steps, delta_floor=delta_floor),
        run_se(params, SeStart.INFORMED, nodes=nodes, max_steps=max_steps, delta_floor=delta_floor),
    ]
    return collect_fixed_points(runs, params, nodes, delta_floor)

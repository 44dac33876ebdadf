"""Asymptotic theory: state evolution, replica potential and phase boundaries.

Key components:
    - hat_params / se_step / run_se / se_fixed_points: state evolution of (E, D)
    - potential: the replica-symmetric potential Phi(E, D)
    - mmse / pi_star / spinodal_pi / phase_diagram: MMSE and phase boundaries
"""

from lib.theory.channels import SePoint, channel_mmse, denominator, hat_params, matrix_mse
from lib.theory.potential import (
    check_stationary,
    potential,
    potential_gradient,
    potential_grid,
    signal_entropy,
)
from lib.theory.state_evolution import (
    FixedPoint,
    SeStart,
    SeTrajectory,
    collect_fixed_points,
    run_se,
    se_fixed_points,
    se_step,
)
from lib.theory.phase import (
    CurvePoint,
    MmseResult,
    PhaseRecord,
    PhaseTag,
    SpinodalOutcome,
    mmse,
    mmse_curve,
    phase_diagram,
    phase_tag,
    pi_star,
    recovery_threshold,
    spinodal_pi,
    spinodal_scan,
)

__all__ = [
    'SePoint',
    'channel_mmse',
    'denominator',
    'hat_params',
    'matrix_mse',
    'check_stationary',
    'potential',
    'potential_gradient',
    'potential_grid',
    'signal_entropy',
    'FixedPoint',
    'SeStart',
    'SeTrajectory',
    'collect_fixed_points',
    'run_se',
    'se_fixed_points',
    'se_step',
    'CurvePoint',
    'MmseResult',
    'PhaseRecord',
    'PhaseTag',
    'SpinodalOutcome',
    'mmse',
    'mmse_curve',
    'phase_diagram',
    'phase_tag',
    'pi_star',
    'recovery_threshold',
    'spinodal_pi',
    'spinodal_scan',
]

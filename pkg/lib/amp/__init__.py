"""Approximate message passing for blind calibration and dictionary learning."""

from lib.amp.engine import (
    AmpFields,
    AmpOptions,
    AmpResult,
    AmpState,
    Overlines,
    TrajectoryPoint,
    amp_iterate,
    compute_fields,
    compute_overlines,
    init_state,
    measure,
    run_amp,
)

__all__ = [
    'AmpFields',
    'AmpOptions',
    'AmpResult',
    'AmpState',
    'Overlines',
    'TrajectoryPoint',
    'amp_iterate',
    'compute_fields',
    'compute_overlines',
    'init_state',
    'measure',
    'run_amp',
]

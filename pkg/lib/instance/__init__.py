"""Synthetic instances of the calibration / dictionary learning model.

Key components:
    - ProblemInstance: the (F0, X0, Y, F') tuple and its parameters
    - generate_instance: seeded draw from the generative model
    - save_instance / load_instance: checksummed binary container
"""

from lib.instance.generator import (
    FieldTag,
    ProblemInstance,
    counting_bound,
    counting_bound_ratio,
    generate_instance,
    problem_sizes,
    substream,
)
from lib.instance.storage import (
    dump_instance,
    load_instance,
    parse_instance,
    save_instance,
)

__all__ = [
    'FieldTag',
    'ProblemInstance',
    'counting_bound',
    'counting_bound_ratio',
    'generate_instance',
    'problem_sizes',
    'substream',
    'dump_instance',
    'load_instance',
    'parse_instance',
    'save_instance',
]

"""Exception hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI maps it to, so callers
deep in the numerical code never need to know about the CLI.
"""

from typing import Any, List, Optional


class MfampError(Exception):
    """Base class for all errors raised by the package."""

    exit_code: int = 1


class InvalidArgumentError(MfampError, ValueError):
    """An argument is non-finite, out of range or otherwise unusable."""

    exit_code = 2


class InvalidSizeError(InvalidArgumentError):
    """Problem sizes derived from (alpha, pi, N) are degenerate."""


class ConfigError(MfampError):
    """A run configuration could not be parsed."""

    exit_code = 2


class UnknownOptionError(ConfigError):
    pass


class ConflictingCommandError(ConfigError):
    pass


class DomainError(MfampError, ValueError):
    """A theory function was evaluated outside its domain."""

    exit_code = 4


class OracleFailureError(MfampError, ArithmeticError):
    """A quadrature did not converge under node doubling."""

    exit_code = 4


class ConsistencyError(MfampError, ArithmeticError):
    """An internal numerical cross-check failed (indicates a bug)."""

    exit_code = 4


class ScanError(MfampError):
    """A threshold scan found a predicate that is not monotone in pi.

    Attributes:
        samples: the (pi, predicate) pairs that exposed the problem
    """

    exit_code = 4

    def __init__(self, message: str, samples: Optional[List[Any]] = None):
        super().__init__(message)
        self.samples = list(samples or [])


class AmpDivergenceError(MfampError, ArithmeticError):
    """AMP produced non-finite values and the damping retry did not help.

    Attributes:
        iteration: sweep index at which the second failure occurred
        trajectory: (E, D, residual) rows recorded before the failure
    """

    exit_code = 3

    def __init__(self, message: str, iteration: int, trajectory: Optional[List[Any]] = None):
        super().__init__(message)
        self.iteration = iteration
        self.trajectory = list(trajectory or [])


class InstanceFileError(MfampError, IOError):
    """Base class for instance file problems."""

    exit_code = 5


class InstanceFormatError(InstanceFileError):
    pass


class InstanceVersionError(InstanceFileError):
    pass


class InstanceTruncatedError(InstanceFileError):
    pass


class InstanceChecksumError(InstanceFileError):
    pass

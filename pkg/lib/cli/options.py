"""Command-line and config-file parsing.

Precedence: command-line flags > config file > defaults. The config file is
flat `key = value` text with `#` comments; keys may be written with `-` or
`_`. Every key of the file must be a known option.
"""

import argparse
import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from lib.amp.engine import AmpOptions
from lib.errors import ConfigError, ConflictingCommandError, InvalidArgumentError, UnknownOptionError
from lib.export.exporters import STDOUT, ExportFormat
from lib.params import AmpMode, Eta, ModelParams, format_eta, parse_eta

logger = logging.getLogger(__name__)

COMMANDS = ("gen", "amp", "se", "potential", "phase")

GRID_DECIMALS = 12


@dataclass(frozen=True)
class GridSpec:
    """Inclusive arithmetic grid written as start:stop:step."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.start, self.stop, self.step)):
            raise InvalidArgumentError(f"grid {self} must be finite")
        if self.step <= 0:
            raise InvalidArgumentError(f"grid step must be > 0, got {self.step}")
        if self.stop < self.start:
            raise InvalidArgumentError(f"grid stop {self.stop} is below start {self.start}")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidArgumentError(f"grid must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise InvalidArgumentError(f"unparsable number in grid {text!r}") from None
        return cls(start, stop, step)

    def values(self) -> List[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + k * self.step, GRID_DECIMALS) for k in range(count)]

    def __str__(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.step!r}"


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one CLI run."""

    command: str
    alpha: float
    pi: float = 4.0
    rho: float = 0.2
    delta: float = 0.0
    eta: Eta = 1e-2
    n: int = 128
    seed: int = 0
    damping: float = 0.5
    max_iter: int = 200
    conv_tol: float = 1e-8
    init_jitter: float = 0.1
    delta_floor: float = 1e-12
    mode: Optional[AmpMode] = None
    pi_grid: Optional[GridSpec] = None
    rho_grid: Optional[GridSpec] = None
    nodes: int = 200
    grid_size: int = 40
    pi_max: float = 20.0
    tol: float = 1e-3
    instance: Optional[str] = None
    format: ExportFormat = ExportFormat.CSV
    output: str = STDOUT

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidArgumentError(f"unknown command {self.command!r}")
        if self.n < 2:
            raise InvalidArgumentError(f"n must be >= 2, got {self.n}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.nodes < 2:
            raise InvalidArgumentError(f"nodes must be >= 2, got {self.nodes}")
        if self.grid_size < 0:
            raise InvalidArgumentError(f"grid_size must be >= 0, got {self.grid_size}")
        if not self.pi_max > 0 or not self.tol > 0:
            raise InvalidArgumentError(f"pi_max and tol must be > 0, got {self.pi_max}, {self.tol}")

    def validate(self) -> None:
        """Check the model parameters and AMP options this config builds.

        Raises:
            InvalidArgumentError: if either is out of range
        """
        _ = self.params
        _ = self.amp_options

    @property
    def params(self) -> ModelParams:
        return ModelParams(alpha=self.alpha, pi=self.pi, rho=self.rho, delta=self.delta, eta=self.eta)

    @property
    def amp_options(self) -> AmpOptions:
        return AmpOptions(
            damping=self.damping,
            max_iter=self.max_iter,
            conv_tol=self.conv_tol,
            init_jitter=self.init_jitter,
            delta_floor=self.delta_floor,
            mode=self.mode,
        )

    def as_meta(self) -> Dict[str, Any]:
        """Configuration echoed into output metadata (output target excluded)."""
        meta: Dict[str, Any] = {}
        for f in fields(self):
            if f.name == "output":
                continue
            value = getattr(self, f.name)
            if f.name == "eta":
                value = format_eta(value)
            elif f.name == "mode":
                value = str(value) if value is not None else str(self.params.mode)
            elif isinstance(value, (GridSpec, ExportFormat)):
                value = str(value)
            meta[f.name] = value
        return meta


# --- value converters -------------------------------------------------------

def _number(kind: Callable[[str], Any]) -> Callable[[str], Any]:
    def convert(text: str):
        try:
            value = kind(text)
        except (TypeError, ValueError):
            raise ConfigError(f"unparsable number {text!r}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"number must be finite, got {text!r}")
        return value
    convert.__name__ = kind.__name__
    return convert


def _eta(text: str) -> Eta:
    try:
        return parse_eta(text)
    except InvalidArgumentError as err:
        raise ConfigError(str(err)) from None


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except InvalidArgumentError as err:
        raise ConfigError(str(err)) from None


def _mode(text: str) -> AmpMode:
    try:
        return AmpMode(text.strip().lower())
    except ValueError:
        raise ConfigError(f"mode must be one of {[str(m) for m in AmpMode]}, got {text!r}") from None


def _format(text: str) -> ExportFormat:
    try:
        return ExportFormat(text.strip().lower())
    except ValueError:
        raise ConfigError(f"format must be one of {[str(f) for f in ExportFormat]}, got {text!r}") from None


_float = _number(float)
_int = _number(int)

CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "alpha": _float,
    "pi": _float,
    "rho": _float,
    "delta": _float,
    "eta": _eta,
    "n": _int,
    "seed": _int,
    "damping": _float,
    "max_iter": _int,
    "conv_tol": _float,
    "init_jitter": _float,
    "delta_floor": _float,
    "mode": _mode,
    "pi_grid": _grid,
    "rho_grid": _grid,
    "nodes": _int,
    "grid_size": _int,
    "pi_max": _float,
    "tol": _float,
    "instance": str,
    "format": _format,
    "output": str,
}

HELP = {
    "alpha": "M/N, measurements per signal component (required)",
    "pi": "P/N, number of signals per dictionary column",
    "rho": "fraction of non-zero signal components",
    "delta": "measurement noise variance",
    "eta": "side-information noise ratio, or 'inf' for dictionary learning",
    "n": "signal dimension N",
    "seed": "64-bit seed of the instance and the initial jitter",
    "damping": "AMP damping weight of the new values",
    "max_iter": "maximum number of AMP sweeps",
    "conv_tol": "AMP stopping tolerance on max |a_new - a_old|",
    "init_jitter": "relative size of the symmetry-breaking initial noise",
    "delta_floor": "floor applied to delta and the AMP denominators",
    "mode": "calibration or dictionary (default: from eta)",
    "pi_grid": "sweep over pi, start:stop:step",
    "rho_grid": "sweep over rho, start:stop:step",
    "nodes": "quadrature nodes of the theory integrals",
    "grid_size": "size of the (E, D) potential grid",
    "pi_max": "upper end of the spinodal search",
    "tol": "spinodal bisection tolerance",
    "instance": "run AMP on a saved instance file",
    "format": "output format, csv or json",
    "output": "output file ('-' for standard output)",
}


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


# --- config file -------------------------------------------------------------

def read_config_file(path, command: str) -> Dict[str, Any]:
    """Parse a flat key = value file into converted option values.

    Raises:
        UnknownOptionError: for keys that are not options
        ConflictingCommandError: if a `command` entry differs from `command`
        ConfigError: for malformed lines or values
    """
    path = Path(path)
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = normalize_key(key)
        if key == "command":
            if value != command:
                raise ConflictingCommandError(
                    f"{path}:{lineno}: config file is for command {value!r} but {command!r} was requested"
                )
            continue
        if key not in CONVERTERS:
            raise UnknownOptionError(f"{path}:{lineno}: unknown option {key!r}")
        try:
            values[key] = CONVERTERS[key](value)
        except ConfigError as err:
            raise ConfigError(f"{path}:{lineno}: {key}: {err}") from None
    logger.debug(f"Read {len(values)} options from {path}")
    return values


# --- command line --------------------------------------------------------------

class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises ConfigError instead of exiting."""

    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownOptionError(message)
        raise ConfigError(message)


def _argparse_type(convert: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        try:
            return convert(text)
        except ConfigError as err:
            raise argparse.ArgumentTypeError(str(err)) from None
    parse.__name__ = getattr(convert, "__name__", "value")
    return parse


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    for key, convert in CONVERTERS.items():
        flag = "--" + key.replace("_", "-")
        names = [flag, "-o"] if key == "output" else [flag]
        common.add_argument(*names, dest=key, type=_argparse_type(convert), help=HELP[key])
    common.add_argument("--config", dest="config", help="flat key = value config file")
    common.add_argument("-v", "--verbose", dest="verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", dest="quiet", action="store_true", help="warnings and errors only")

    parser = ArgumentParser(
        prog="mfamp",
        description="Message passing and phase diagrams for blind calibration and dictionary learning",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    descriptions = {
        "gen": "generate an instance file",
        "amp": "run AMP on a generated or saved instance",
        "se": "state evolution trajectory, or MMSE curve with --pi-grid",
        "potential": "replica potential on an (E, D) grid",
        "phase": "phase diagram over rho and pi grids",
    }
    for command in COMMANDS:
        sub.add_parser(
            command,
            parents=[common],
            help=descriptions[command],
            description=descriptions[command],
            argument_default=argparse.SUPPRESS,
        )
    return parser


@dataclass(frozen=True)
class ParsedArgs:
    config: RunConfig
    log_level: int


def parse_args(argv: Optional[Sequence[str]] = None) -> ParsedArgs:
    """Parse argv (and an optional --config file) into a RunConfig and log level."""
    namespace = vars(build_parser().parse_args(argv))
    command = namespace.pop("command")
    verbose = namespace.pop("verbose", False)
    quiet = namespace.pop("quiet", False)
    config_file = namespace.pop("config", None)

    values: Dict[str, Any] = {}
    if config_file is not None:
        values.update(read_config_file(config_file, command))
    values.update(namespace)

    if "alpha" not in values:
        raise ConfigError(f"{command}: missing required option --alpha")
    if command == "gen" and values.get("output", STDOUT) == STDOUT:
        raise ConfigError("gen: --output FILE is required for the binary instance")

    try:
        config = RunConfig(command=command, **values)
        config.validate()
    except InvalidArgumentError as err:
        raise ConfigError(f"{command}: {err}") from None

    level = logging.DEBUG if verbose else (logging.WARNING if quiet else logging.INFO)
    return ParsedArgs(config=config, log_level=level)


def parse_config(argv: Optional[Sequence[str]] = None, config_file=None) -> RunConfig:
    """Build a RunConfig from argv and an optional config file.

    Args:
        argv: command line without the program name
        config_file: config file path; overrides nothing given in argv

    Raises:
        ConfigError: missing --alpha, unparsable number, bad value
        UnknownOptionError: unknown flag or config key
        ConflictingCommandError: config file for another command
    """
    argv = list(argv or [])
    if config_file is not None:
        argv += ["--config", str(config_file)]
    return parse_args(argv).config

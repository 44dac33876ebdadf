"""Command implementations.

Each command builds a ResultTable whose metadata block records the package
version, the table schema, the command and the full resolved config, then
hands it to the exporter selected by --format.
"""

import logging
import math
from typing import Callable, Dict, List, Optional

from lib import __version__
from lib.amp import AmpResult, TrajectoryPoint, run_amp
from lib.cli.options import RunConfig
from lib.errors import AmpDivergenceError, ConfigError, MfampError
from lib.export import SCHEMA_VERSION, DataType, ResultTable, export_data
from lib.instance import ProblemInstance, generate_instance, load_instance, save_instance
from lib.parallel import run_cells
from lib.theory import (
    PhaseTag,
    SeStart,
    mmse,
    mmse_curve,
    phase_diagram,
    potential,
    potential_grid,
    run_se,
)

logger = logging.getLogger(__name__)

AMP_COLUMNS = ["kind", "t", "E", "D", "residual", "converged"]
AMP_SWEEP_COLUMNS = ["pi", "N", "M", "P", "iterations", "E", "D", "residual", "converged"]
SE_COLUMNS = ["kind", "t", "E", "D", "m_hat_x", "m_hat_F", "phi", "basin"]
CURVE_COLUMNS = ["pi", "E", "D", "phi", "tag"]
POTENTIAL_COLUMNS = ["E", "D", "phi"]
PHASE_COLUMNS = ["rho", "pi", "pi_star", "pi_spinodal", "spinodal", "E", "D", "phi", "tag"]


def new_table(config: RunConfig, data_type: DataType, columns: List[str], seed: Optional[int] = None) -> ResultTable:
    """Empty table with the run metadata; seed, when given, replaces config.seed."""
    meta = {
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "command": config.command,
        "data": str(data_type),
        "seed": config.seed if seed is None else seed,
        "config": config.as_meta(),
    }
    return ResultTable(data_type=data_type, meta=meta, columns=list(columns))


def write(table: ResultTable, config: RunConfig) -> None:
    export_data(table, config.format, config.output)


# --- gen --------------------------------------------------------------------

def run_gen(config: RunConfig) -> int:
    inst = generate_instance(config.params, config.n, config.seed)
    if not inst.counting_bound:
        logger.info(f"Instance has fewer measurements than unknowns (M={inst.M}, N={inst.N}, P={inst.P})")
    save_instance(inst, config.output)
    return 0


# --- amp --------------------------------------------------------------------

def _trajectory_rows(table: ResultTable, trajectory: List[TrajectoryPoint]) -> None:
    for point in trajectory:
        table.add_row("iteration", point.t, point.E, point.D, point.residual, None)


def _load_or_generate(config: RunConfig) -> ProblemInstance:
    if config.instance is None:
        return generate_instance(config.params, config.n, config.seed)
    inst = load_instance(config.instance)
    logger.info(
        f"Loaded instance {config.instance}: N={inst.N} M={inst.M} P={inst.P} "
        f"seed={inst.seed}; model parameters are taken from the file"
    )
    return inst


def run_amp_single(config: RunConfig) -> int:
    inst = _load_or_generate(config)
    table = new_table(config, DataType.AMP_TRAJECTORY, AMP_COLUMNS, seed=inst.seed)
    try:
        result = run_amp(inst, config.amp_options)
    except AmpDivergenceError as err:
        _trajectory_rows(table, err.trajectory or [])
        write(table, config)
        logger.error(f"[AMP] diverged at sweep {err.iteration}; wrote {len(table.rows)} partial rows")
        return err.exit_code

    _trajectory_rows(table, result.trajectory)
    final = result.final
    table.add_row("summary", result.iterations, final.E, final.D, final.residual, result.converged)
    write(table, config)
    return 0


def run_amp_sweep(config: RunConfig) -> int:
    if config.instance is not None:
        raise ConfigError("--instance and --pi-grid cannot be combined")
    params = config.params
    opts = config.amp_options

    def cell(pi: float) -> tuple:
        inst = generate_instance(params.with_pi(pi), config.n, config.seed)
        try:
            result: AmpResult = run_amp(inst, opts)
        except AmpDivergenceError as err:
            logger.warning(f"[AMP] pi={pi} diverged at sweep {err.iteration}")
            return (pi, inst.N, inst.M, inst.P, err.iteration, math.nan, math.nan, math.nan, False)
        final = result.final
        return (pi, inst.N, inst.M, inst.P, result.iterations, final.E, final.D, final.residual, result.converged)

    table = new_table(config, DataType.AMP_SWEEP, AMP_SWEEP_COLUMNS)
    for row in run_cells(cell, config.pi_grid.values()):
        table.add_row(*row)
    write(table, config)
    return 0


def run_amp_command(config: RunConfig) -> int:
    if config.pi_grid is not None:
        return run_amp_sweep(config)
    return run_amp_single(config)


# --- se ---------------------------------------------------------------------

def run_se_command(config: RunConfig) -> int:
    params = config.params
    if config.pi_grid is not None:
        curve = mmse_curve(params, config.pi_grid.values(), config.nodes, config.grid_size, config.delta_floor)
        table = new_table(config, DataType.MMSE_CURVE, CURVE_COLUMNS)
        for point in curve:
            table.add_row(point.pi, point.E, point.D, point.phi, point.tag)
        write(table, config)
        return 0

    traj = run_se(params, SeStart.UNINFORMATIVE, nodes=config.nodes, delta_floor=config.delta_floor)
    table = new_table(config, DataType.SE_TRAJECTORY, SE_COLUMNS)
    for t, point in enumerate(traj.points):
        m_x, m_f = traj.hats[t] if t < len(traj.hats) else (None, None)
        phi = potential(point.E, point.D, params, config.nodes, config.delta_floor)
        table.add_row("trajectory", t, point.E, point.D, m_x, m_f, phi, traj.start)

    result = mmse(params, config.nodes, config.grid_size, config.delta_floor)
    for fp in result.candidates:
        table.add_row("fixed_point", None, fp.point.E, fp.point.D, None, None, fp.phi, fp.basin)
    best = next(
        (fp.basin for fp in result.candidates if fp.point.E == result.E and fp.point.D == result.D),
        None,
    )
    table.add_row("mmse", None, result.E, result.D, None, None, result.phi, best)
    write(table, config)
    return 0


# --- potential ----------------------------------------------------------------

def run_potential(config: RunConfig) -> int:
    e_values, d_values, phi = potential_grid(
        config.params, config.grid_size, nodes=config.nodes, delta_floor=config.delta_floor
    )
    table = new_table(config, DataType.POTENTIAL_GRID, POTENTIAL_COLUMNS)
    for i, e in enumerate(e_values):
        for j, d in enumerate(d_values):
            table.add_row(float(e), float(d), float(phi[i, j]))
    write(table, config)
    return 0


# --- phase --------------------------------------------------------------------

def run_phase(config: RunConfig) -> int:
    rho_values = config.rho_grid.values() if config.rho_grid is not None else [config.rho]
    pi_values = config.pi_grid.values() if config.pi_grid is not None else [config.pi]
    records = phase_diagram(
        config.alpha,
        config.delta,
        config.eta,
        rho_values,
        pi_values,
        tol=config.tol,
        pi_max=config.pi_max,
        nodes=config.nodes,
        grid_size=config.grid_size,
        delta_floor=config.delta_floor,
    )
    table = new_table(config, DataType.PHASE, PHASE_COLUMNS)
    for record in records:
        for point in record.curve:
            table.add_row(
                record.rho,
                point.pi,
                record.pi_star,
                record.pi_spinodal,
                record.spinodal_outcome,
                point.E,
                point.D,
                point.phi,
                point.tag,
            )
    failed = sum(1 for r in records for p in r.curve if p.tag is PhaseTag.FAILED)
    if failed:
        logger.warning(f"[PHASE] {failed} cells failed and are tagged 'failed'")
    write(table, config)
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "gen": run_gen,
    "amp": run_amp_command,
    "se": run_se_command,
    "potential": run_potential,
    "phase": run_phase,
}


def execute(config: RunConfig) -> int:
    """Run a parsed command and return the process exit code.

    Errors other than AMP divergence propagate as MfampError subclasses and
    are mapped to exit codes by the entry point.
    """
    handler: Optional[Callable[[RunConfig], int]] = COMMANDS.get(config.command)
    if handler is None:
        raise MfampError(f"unknown command {config.command!r}")
    logger.debug(f"Executing {config.command} with {config.as_meta()}")
    return handler(config)

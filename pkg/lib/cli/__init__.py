"""Command-line surface: gen, amp, se, potential and phase.

Key components:
    - parse_config / parse_args: flags, config file and defaults into a RunConfig
    - execute: run a RunConfig and write its result table
    - main: entry point with logging setup and exit-code mapping
"""

from lib.cli.options import GridSpec, ParsedArgs, RunConfig, parse_args, parse_config, read_config_file
from lib.cli.commands import execute
from lib.cli.app import main

__all__ = [
    'GridSpec',
    'ParsedArgs',
    'RunConfig',
    'execute',
    'main',
    'parse_args',
    'parse_config',
    'read_config_file',
]

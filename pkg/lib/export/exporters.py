"""Core export API and base classes.

This module defines the foundational classes for writing experiment results:
- ResultTable: metadata block plus fixed-order columns and rows
- BaseExporter: Abstract base class that all exporters must implement
- ExporterRegistry: Central registry for managing and instantiating exporters
- ExportFormat: Enumeration of supported output formats
- DataType: Enumeration of result kinds (AMP runs, SE runs, grids, sweeps)
- ExportContext: Data class containing all export parameters
- ExportResult: Data class containing export operation results

The architecture uses a registry pattern so new formats can be added
without modifying the commands that produce results.
"""

import logging
import math
import numbers
import sys
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, Union

import numpy as np

logger = logging.getLogger(__name__)

STDOUT = "-"
SCHEMA_VERSION = 1


class ExportFormat(Enum):
    """Enumeration of supported output formats."""
    CSV = "csv"           # header row, '#'-prefixed metadata lines
    JSON = "json"         # one object with "meta" and "rows"

    def __str__(self) -> str:
        return self.value


class DataType(Enum):
    """Enumeration of result kinds.

    - AMP_TRAJECTORY: per-iteration rows of one AMP run plus a summary row
    - AMP_SWEEP: one summary row per pi
    - SE_TRAJECTORY: state-evolution trajectory plus the fixed point
    - MMSE_CURVE: MMSE versus pi
    - POTENTIAL_GRID: Phi on an (E, D) grid
    - PHASE: phase-diagram rows
    """
    AMP_TRAJECTORY = "amp"
    AMP_SWEEP = "amp_sweep"
    SE_TRAJECTORY = "se"
    MMSE_CURVE = "mmse_curve"
    POTENTIAL_GRID = "potential"
    PHASE = "phase"

    def __str__(self) -> str:
        return self.value


@dataclass
class ResultTable:
    """Tabular result with a metadata block.

    Attributes:
        data_type: kind of result
        meta: ordered metadata (version, schema, command, config, seed)
        columns: column names in output order
        rows: one tuple per row, aligned with columns
    """
    data_type: DataType
    meta: Dict[str, Any]
    columns: List[str]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(tuple(values))

    def as_dicts(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def format_value(value: Any) -> str:
    """Text form of a cell: shortest round-trip repr for floats, '' for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return repr(float(value))
    return str(value)


def json_value(value: Any) -> Any:
    """JSON-safe form of a cell; non-finite floats become strings."""
    if isinstance(value, Enum):
        return str(value)
    if isinstance(value, dict):
        return {str(k): json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_value(v) for v in value]
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        number = float(value)
        if math.isfinite(number):
            return number
        return "nan" if math.isnan(number) else ("inf" if number > 0 else "-inf")
    return str(value)


@dataclass
class ExportContext:
    """Context object containing all parameters for an export operation.

    Attributes:
        source: The ResultTable to write
        data_type: The DataType describing the source
        format: Desired output format
        output: Output file path, or "-" for standard output
    """
    source: Any
    data_type: DataType
    format: ExportFormat
    output: Union[str, Path] = STDOUT

    def __post_init__(self):
        """Normalize the output target and create its parent directory."""
        if str(self.output) == STDOUT:
            self.output = STDOUT
            return
        if not isinstance(self.output, Path):
            self.output = Path(self.output)
        self.output.parent.mkdir(parents=True, exist_ok=True)

    @property
    def to_stdout(self) -> bool:
        return self.output == STDOUT


@dataclass
class ExportResult:
    """Result object returned by export operations.

    Attributes:
        success: Whether the export completed successfully
        files: List of file paths that were written (empty for stdout)
        format: Export format that was used
        data_type: Data type that was exported
        metadata: Additional format-specific metadata
        duration: Time taken for the export operation
    """
    success: bool
    files: List[Path]
    format: ExportFormat
    data_type: DataType
    metadata: Dict[str, Any] = field(default_factory=dict)
    duration: Optional[float] = None

    @property
    def file_count(self) -> int:
        """Return the number of files written."""
        return len(self.files)


class BaseExporter(ABC):
    """Abstract base class for all result exporters.

    Exporters are stateless: render() turns a ResultTable into text and
    export() writes that text to the context's output.

    Class attributes:
        FORMAT: The ExportFormat this exporter handles
        DATA_TYPES: The DataTypes this exporter accepts
        NAME: Unique identifier for this exporter variant
        DESCRIPTION: Human-readable description of this exporter
    """

    FORMAT: ExportFormat = None
    DATA_TYPES: Tuple[DataType, ...] = ()
    NAME: str = "default"
    DESCRIPTION: str = ""

    @abstractmethod
    def render(self, table: ResultTable) -> str:
        """Return the full text of the output for one table."""

    def validate_context(self, context: ExportContext) -> bool:
        """Validate that the context is appropriate for this exporter.

        Raises:
            ValueError: If context is invalid with explanation
        """
        if context.format != self.FORMAT:
            raise ValueError(
                f"{self.__class__.__name__} expects format {self.FORMAT}, "
                f"got {context.format}"
            )

        if context.data_type not in self.DATA_TYPES:
            raise ValueError(
                f"{self.__class__.__name__} does not handle data type {context.data_type}"
            )

        if not isinstance(context.source, ResultTable):
            raise ValueError("ExportContext source must be a ResultTable")

        return True

    def export(self, context: ExportContext) -> ExportResult:
        """Render the table and write it to the output.

        Raises:
            ValueError: If context is invalid for this exporter
            OSError: If the output cannot be written
        """
        started = time.perf_counter()
        self.validate_context(context)
        text = self.render(context.source)
        files: List[Path] = []
        if context.to_stdout:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(context.output, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            files.append(context.output)
            logger.info(f"Wrote {len(context.source.rows)} {context.data_type} rows to {context.output}")
        return ExportResult(
            success=True,
            files=files,
            format=self.FORMAT,
            data_type=context.data_type,
            metadata={'rows': len(context.source.rows)},
            duration=time.perf_counter() - started,
        )

    @classmethod
    def get_info(cls) -> Dict[str, str]:
        return {
            'format': str(cls.FORMAT) if cls.FORMAT else 'unknown',
            'data_types': ','.join(str(t) for t in cls.DATA_TYPES),
            'name': cls.NAME,
            'description': cls.DESCRIPTION,
            'class': cls.__name__,
        }


class ExporterRegistry:
    """Central registry for managing result exporters.

    Maps (format, data_type, name) -> exporter class. An exporter declaring
    several DATA_TYPES is registered under each of them.

    Usage:
        ExporterRegistry.register(CsvTableExporter)
        exporter = ExporterRegistry.get_exporter(ExportFormat.CSV, DataType.PHASE)
    """

    _registry: Dict[tuple, Type[BaseExporter]] = {}

    @classmethod
    def register(cls, exporter_class: Type[BaseExporter]) -> None:
        """Register an exporter class.

        Raises:
            ValueError: If exporter is missing required attributes
            TypeError: If exporter_class is not a BaseExporter subclass
        """
        if not issubclass(exporter_class, BaseExporter):
            raise TypeError(
                f"{exporter_class.__name__} must inherit from BaseExporter"
            )

        if exporter_class.FORMAT is None:
            raise ValueError(
                f"{exporter_class.__name__} must define FORMAT class attribute"
            )

        if not exporter_class.DATA_TYPES:
            raise ValueError(
                f"{exporter_class.__name__} must define DATA_TYPES class attribute"
            )

        if not exporter_class.NAME:
            raise ValueError(
                f"{exporter_class.__name__} must define NAME class attribute"
            )

        for data_type in exporter_class.DATA_TYPES:
            key = (exporter_class.FORMAT, data_type, exporter_class.NAME)
            if key in cls._registry and cls._registry[key] is not exporter_class:
                logger.warning(
                    f"Replacing exporter for {key}: "
                    f"{cls._registry[key].__name__} -> {exporter_class.__name__}"
                )
            cls._registry[key] = exporter_class

    @classmethod
    def get_exporter(
        cls,
        format: ExportFormat,
        data_type: DataType,
        name: str = "default"
    ) -> BaseExporter:
        """Get an exporter instance for the format, data type and name.

        Raises:
            KeyError: If no exporter is registered for the given combination
        """
        key = (format, data_type, name)

        if key not in cls._registry:
            available = cls.get_exporters_for(format, data_type)
            if available:
                available_names = [exp['name'] for exp in available]
                raise KeyError(
                    f"No exporter registered for {format} + {data_type} + '{name}'. "
                    f"Available names: {available_names}"
                )
            raise KeyError(
                f"No exporter registered for {format} + {data_type}. "
                f"Available: {cls.list_exporters()}"
            )

        return cls._registry[key]()

    @classmethod
    def list_exporters(cls) -> List[Dict[str, str]]:
        unique = {exporter_class for exporter_class in cls._registry.values()}
        return sorted((e.get_info() for e in unique), key=lambda e: (e['format'], e['name']))

    @classmethod
    def get_exporters_for(
        cls,
        format: ExportFormat = None,
        data_type: DataType = None
    ) -> List[Dict[str, str]]:
        matching = [
            exporter_class.get_info()
            for (fmt, dtype, name), exporter_class in cls._registry.items()
            if (format is None or fmt == format) and (data_type is None or dtype == data_type)
        ]
        return sorted(matching, key=lambda e: e['name'])


def render_table(table: ResultTable, format: ExportFormat, exporter_name: str = "default") -> str:
    """Render a table to text without writing it."""
    return ExporterRegistry.get_exporter(format, table.data_type, exporter_name).render(table)


def export_data(
    source: ResultTable,
    format: ExportFormat,
    output: Union[str, Path] = STDOUT,
    exporter_name: str = "default",
) -> ExportResult:
    """Convenience function to export a table in one call."""
    context = ExportContext(
        source=source,
        data_type=source.data_type,
        format=format,
        output=output,
    )

    exporter = ExporterRegistry.get_exporter(format, source.data_type, exporter_name)
    return exporter.export(context)

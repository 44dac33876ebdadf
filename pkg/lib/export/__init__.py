"""Export module for experiment results.

This module writes result tables in machine-readable formats (CSV, JSON).
The core architecture uses a registry pattern to allow easy addition of new
output formats.

Key components:
    - ResultTable: metadata block plus fixed-order columns and rows
    - BaseExporter: Abstract base class for all exporters
    - ExporterRegistry: Central registry and factory for exporters
    - ExportFormat: Enumeration of supported output formats
    - ExportContext: Data container with the table and output target
    - DataType: Enumeration of result kinds

Example usage:
    ```python
    from lib.export import DataType, ExportFormat, ResultTable, export_data

    table = ResultTable(DataType.PHASE, meta={"version": "1.0.0"}, columns=["rho", "pi"])
    table.add_row(0.2, 1.75)
    export_data(table, ExportFormat.CSV, "phase.csv")
    ```
"""

from lib.export.exporters import (
    SCHEMA_VERSION,
    STDOUT,
    BaseExporter,
    DataType,
    ExportContext,
    ExporterRegistry,
    ExportFormat,
    ExportResult,
    ResultTable,
    export_data,
    format_value,
    json_value,
    render_table,
)

# Import exporters to auto-register them
import lib.export.csv_exporter  # noqa: F401
import lib.export.json_exporter  # noqa: F401

__all__ = [
    'SCHEMA_VERSION',
    'STDOUT',
    'BaseExporter',
    'DataType',
    'ExportContext',
    'ExporterRegistry',
    'ExportFormat',
    'ExportResult',
    'ResultTable',
    'export_data',
    'format_value',
    'json_value',
    'render_table',
]

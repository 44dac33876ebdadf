"""CSV exporter for result tables.

The file starts with one `# key = value` line per metadata entry (nested
config entries are flattened as `config.key`), followed by the header row
and the data rows. Floats use their shortest round-trip representation.
"""

import csv
import io
from typing import Any, Dict, Iterator, Tuple

from lib.export.exporters import (
    BaseExporter,
    DataType,
    ExporterRegistry,
    ExportFormat,
    ResultTable,
    format_value,
)


def flatten_meta(meta: Dict[str, Any], prefix: str = "") -> Iterator[Tuple[str, str]]:
    for key, value in meta.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from flatten_meta(value, f"{name}.")
        else:
            yield name, format_value(value)


class CsvTableExporter(BaseExporter):
    FORMAT = ExportFormat.CSV
    DATA_TYPES = (
        DataType.AMP_TRAJECTORY,
        DataType.AMP_SWEEP,
        DataType.SE_TRAJECTORY,
        DataType.MMSE_CURVE,
        DataType.POTENTIAL_GRID,
        DataType.PHASE,
    )
    NAME = "default"
    DESCRIPTION = "CSV with '#' metadata lines and a fixed column order"

    def render(self, table: ResultTable) -> str:
        buffer = io.StringIO()
        for key, value in flatten_meta(table.meta):
            buffer.write(f"# {key} = {value}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])
        return buffer.getvalue()


ExporterRegistry.register(CsvTableExporter)

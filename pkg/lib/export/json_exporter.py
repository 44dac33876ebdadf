"""JSON exporter for result tables.

Writes one object {"meta": ..., "rows": [...]} with rows as column-keyed
objects. NaN and infinities are written as the strings "nan", "inf", "-inf".
"""

import json

from lib.export.exporters import (
    BaseExporter,
    DataType,
    ExporterRegistry,
    ExportFormat,
    ResultTable,
    json_value,
)


class JsonTableExporter(BaseExporter):
    FORMAT = ExportFormat.JSON
    DATA_TYPES = (
        DataType.AMP_TRAJECTORY,
        DataType.AMP_SWEEP,
        DataType.SE_TRAJECTORY,
        DataType.MMSE_CURVE,
        DataType.POTENTIAL_GRID,
        DataType.PHASE,
    )
    NAME = "default"
    DESCRIPTION = "JSON object with 'meta' and 'rows'"

    def render(self, table: ResultTable) -> str:
        document = {
            'meta': json_value(table.meta),
            'rows': [json_value(row) for row in table.as_dicts()],
        }
        return json.dumps(document, indent=2, allow_nan=False) + "\n"


ExporterRegistry.register(JsonTableExporter)

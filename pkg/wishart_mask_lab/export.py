"""Rendering of reports to JSON, CSV and gnuplot scripts.

- JSON: any report model, pretty-printed
- CSV: report tables and phase-sweep tables with a commented metadata header
- gnuplot: companion script plotting tv_lower against d, one curve per p
"""

import csv
import io
import logging
import sys
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Literal

from pydantic import BaseModel

from .experiments import SweepRow
from .models import SWEEP_COLUMNS, RunMetadata, TabularDocument

logger = logging.getLogger(__name__)

ExportFormat = Literal["json", "csv"]


class ReportExporter:
    """Render reports with a fixed number of significant digits."""

    def __init__(self, significant_digits: int = 6, json_indent: int = 2) -> None:
        if significant_digits < 1:
            raise ValueError(f"Significant digits must be positive, got {significant_digits}")
        self.significant_digits = significant_digits
        self.json_indent = json_indent

    def _number(self, value: float | int | None) -> str:
        if value is None:
            return ""
        if isinstance(value, int):
            return str(value)
        return f"{value:.{self.significant_digits}g}"

    def _cell(self, value: object) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if value is None or isinstance(value, int | float):
            return self._number(value)
        return str(value)

    def to_json(self, document: BaseModel) -> str:
        return document.model_dump_json(indent=self.json_indent) + "\n"

    def table_to_csv(
        self,
        columns: Sequence[str],
        records: Iterable[Mapping[str, object]],
        metadata: RunMetadata,
    ) -> str:
        """CSV table preceded by ``# key: value`` metadata lines.

        Missing and ``None`` cells are written empty.
        """
        buffer = io.StringIO()
        buffer.write(f"# tool: {metadata.tool} {metadata.version}\n")
        buffer.write(f"# command: {metadata.command}\n")
        buffer.write(f"# argv: {' '.join(metadata.argv)}\n")
        buffer.write(f"# seed: {metadata.seed}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([self._cell(record.get(column)) for column in columns])
        return buffer.getvalue()

    def document_to_csv(self, document: TabularDocument) -> str:
        columns, records = document.csv_table()
        return self.table_to_csv(columns, records, document.metadata)

    def render(self, document: TabularDocument, output_format: ExportFormat) -> str:
        if output_format == "csv":
            return self.document_to_csv(document)
        return self.to_json(document)

    def gnuplot_script(self, csv_path: Path, rows: Sequence[SweepRow]) -> str:
        """Plot ``tv_lower`` against ``d`` on a log axis, one curve per ``p``."""
        p_values = list(dict.fromkeys(row.p for row in rows))
        tv_column = SWEEP_COLUMNS.index("tv_lower") + 1
        d_column = SWEEP_COLUMNS.index("d") + 1
        p_column = SWEEP_COLUMNS.index("p") + 1
        lines = [
            "set datafile separator ','",
            "set datafile commentschars '#'",
            "set logscale x",
            "set xlabel 'd'",
            "set ylabel 'tv_lower'",
            "set yrange [0:1]",
        ]
        plots = [
            f"'{csv_path.name}' using (abs(${p_column} - {self._number(p)}) < 1e-12 ? ${d_column} : 1/0):"
            f"{tv_column} with linespoints title 'p={self._number(p)}'"
            for p in p_values
        ]
        if plots:
            lines.append("plot " + ", \\\n     ".join(plots))
        return "\n".join(lines) + "\n"

    def write(self, content: str, out: Path | None) -> None:
        """Write ``content`` to ``out``, or to stdout when no path is given."""
        if out is None:
            sys.stdout.write(content)
            return
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(content, encoding="utf-8")
        logger.info(f"Wrote {len(content)} bytes to {out}")

"""
Writers shared by the commands: JSON envelope, CSV and plain tables.
"""

import csv
import io
import math
import sys
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional, Sequence, TextIO

from ..config import OutputSection
from ..schemas import OutputFormat
from ..utils import create_response, format_number


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    if value is None:
        return ""
    return str(value)


def _plain_cell(value: Any) -> str:
    if isinstance(value, float) and math.isfinite(value):
        return f"{value:.6g}"
    return _cell(value)


def csv_text(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key)) for key in columns})
    return buffer.getvalue()


def plain_text(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    table = [list(columns)] + [[_plain_cell(row.get(key)) for key in columns] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(columns))]
    lines = ["  ".join(cell.rjust(width) for cell, width in zip(line, widths)) for line in table]
    return "\n".join(lines) + "\n"


@contextmanager
def open_output(output: OutputSection) -> Iterator[TextIO]:
    if output.path is None:
        yield sys.stdout
        return
    with open(output.path, "w", encoding="utf-8", newline="") as handle:
        yield handle


def emit(
    output: OutputSection,
    data: Any,
    rows: List[Dict[str, Any]],
    columns: Sequence[str],
    message: str = "success",
    plain: Optional[str] = None,
) -> None:
    """Write one command result in the configured format."""
    if output.format == OutputFormat.JSON:
        text = create_response(data=data, message=message).model_dump_json(indent=2) + "\n"
    elif output.format == OutputFormat.CSV:
        text = csv_text(rows, columns)
    else:
        text = plain if plain is not None else plain_text(rows, columns)
    with open_output(output) as stream:
        stream.write(text)

"""Plot-ready CSV tables.

Numbers are written with 12 significant digits and rows are sorted by
their leading grid coordinates, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .correlators import MeasurementSettings

SETTINGS_COLUMNS = [
    "xi1_re", "xi1_im", "xi1p_re", "xi1p_im",
    "xi2_re", "xi2_im", "xi2p_re", "xi2p_im",
]


def format_number(value) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return "nan"
    if isinstance(value, (bool, int)) and not isinstance(value, float):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        return "0"  # folds -0.0
    return format(value, ".12g")


def settings_fields(settings: MeasurementSettings | None) -> list[float]:
    if settings is None:
        return [math.nan] * 8
    return [float(v) for v in settings.to_array()]


def sort_rows(rows, keys: int):
    """Sort lexicographically on the first ``keys`` columns."""
    return sorted(rows, key=lambda row: tuple(row[:keys]))


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(columns, rows))
    return path

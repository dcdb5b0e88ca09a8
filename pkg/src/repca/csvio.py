"""CSV persistence for matrices.

Values are written with 17 significant digits, which round-trips IEEE
doubles exactly.  Data matrices go to disk transposed (one sample per
row); projection matrices are written as stored (one feature row per
line, one component per column).
"""
from __future__ import annotations

import numpy as np

from .errors import CsvParseError

FLOAT_FORMAT = "%.17g"


def write_matrix_csv(path, matrix: np.ndarray, header: list[str] | None = None) -> None:
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={arr.ndim}")
    with open(path, "w", encoding="ascii") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in arr:
            fh.write(",".join(FLOAT_FORMAT % v for v in row) + "\n")


def write_mask_csv(path, mask: np.ndarray) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for flag in np.asarray(mask):
            fh.write(f"{int(bool(flag))}\n")


def read_matrix_csv(path, skip_header: bool = False) -> np.ndarray:
    """Parse a numeric CSV; errors name the offending 1-based line."""
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and skip_header:
                continue
            text = line.strip()
            if not text:
                continue
            fields = text.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise CsvParseError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(fields)}"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                bad = next(f for f in fields if not _parses(f))
                raise CsvParseError(
                    f"{path}: line {lineno}: not a number: {bad!r}"
                ) from None
    if not rows:
        raise CsvParseError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _parses(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False

"""CSV result tables."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

from tedium.sem.core.exceptions import OutputError, ValidationError

logger = logging.getLogger(__name__)

Cell = Union[str, int, float, bool, None]


def format_cell(value: Cell) -> str:
    """Floats with 17 significant digits, integers and text unchanged."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_rows(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> int:
    """Write a header and rows to an open text stream; returns the row count."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        if len(row) != len(header):
            raise ValidationError(f"row has {len(row)} cells, header has {len(header)}", value=tuple(row))
        writer.writerow([format_cell(v) for v in row])
        count += 1
    return count


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> Path:
    """Write a CSV file with :func:`format_cell` formatting."""
    target = Path(path)
    try:
        with target.open("w", newline="", encoding="utf-8") as fh:
            count = write_rows(fh, header, rows)
    except OSError as e:
        raise OutputError(str(target), e.strerror or str(e)) from e
    logger.debug("wrote %s (%d rows)", target, count)
    return target


def output_directory(path: Union[str, Path]) -> Path:
    """Create ``path`` and its parents if missing."""
    target = Path(path)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(str(target), e.strerror or str(e)) from e
    return target


class CsvStream:
    """CSV file written one row at a time and flushed after every row.

    Rows already written survive a failure later in the run::

        with CsvStream(path, ["step", "energy"]) as table:
            table.write([0, 1.5])
    """

    def __init__(self, path: Union[str, Path], header: Sequence[str]) -> None:
        self.path = Path(path)
        self.header = tuple(header)
        self.count = 0
        try:
            self._fh: IO[str] = self.path.open("w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._fh, lineterminator="\n")
            self._writer.writerow(self.header)
            self._fh.flush()
        except OSError as e:
            raise OutputError(str(self.path), e.strerror or str(e)) from e

    def write(self, row: Sequence[Cell]) -> None:
        if len(row) != len(self.header):
            raise ValidationError(f"row has {len(row)} cells, header has {len(self.header)}", value=tuple(row))
        try:
            self._writer.writerow([format_cell(v) for v in row])
            self._fh.flush()
        except OSError as e:
            raise OutputError(str(self.path), e.strerror or str(e)) from e
        self.count += 1

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()
            logger.debug("wrote %s (%d rows)", self.path, self.count)

    def __enter__(self) -> "CsvStream":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

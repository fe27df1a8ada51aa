"""Tests for CSV result tables."""

import io
from pathlib import Path

import numpy as np
import pytest

from tedium.sem.core.exceptions import OutputError, ValidationError
from tedium.sem.io.tables import CsvStream, format_cell, output_directory, write_csv, write_rows


def test_format_cell() -> None:
    """Test formatting of each cell kind."""
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(3) == "3"
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell("neumann") == "neumann"
    for value in (1.0 / 3.0, 6.02e23, -4.32e-5):
        assert float(format_cell(value)) == value


def test_write_rows() -> None:
    """Test header and rows go to the stream."""
    stream = io.StringIO()
    count = write_rows(stream, ["cells", "error", "order"], [(4, 0.5, None), (8, 0.25, 1.0)])
    assert count == 2
    assert stream.getvalue() == "cells,error,order\n4,0.5,\n8,0.25,1\n"


def test_write_rows_length_mismatch() -> None:
    """Test a short row is rejected."""
    with pytest.raises(ValidationError):
        write_rows(io.StringIO(), ["a", "b"], [(1,)])


def test_write_csv(tmp_path: Path) -> None:
    """Test the file round-trips as text."""
    target = write_csv(tmp_path / "out.csv", ["step", "energy"], [(0, 1.5), (1, 1.25)])
    assert target.read_text(encoding="utf-8").splitlines() == ["step,energy", "0,1.5", "1,1.25"]


def test_write_csv_missing_directory(tmp_path: Path) -> None:
    """Test an unwritable target raises OutputError with the path."""
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(OutputError) as excinfo:
        write_csv(target, ["a"], [(1,)])
    assert excinfo.value.path == str(target)
    assert isinstance(excinfo.value.__cause__, OSError)


def test_output_directory(tmp_path: Path) -> None:
    """Test nested directories are created and a file in the way is reported."""
    nested = output_directory(tmp_path / "a" / "b")
    assert nested.is_dir()
    assert output_directory(nested) == nested
    blocker = tmp_path / "plain"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OutputError):
        output_directory(blocker / "sub")


def test_csv_stream_flushes_each_row(tmp_path: Path) -> None:
    """Test rows are on disk before the stream is closed."""
    target = tmp_path / "energy.csv"
    with CsvStream(target, ["step", "energy"]) as table:
        assert target.read_text(encoding="utf-8") == "step,energy\n"
        table.write([0, 1.5])
        assert target.read_text(encoding="utf-8").splitlines() == ["step,energy", "0,1.5"]
        with pytest.raises(ValidationError):
            table.write([1])
        table.write([1, 1.25])
    assert table.count == 2
    assert target.read_text(encoding="utf-8").splitlines() == ["step,energy", "0,1.5", "1,1.25"]
    with pytest.raises(OutputError):
        CsvStream(tmp_path / "missing" / "energy.csv", ["step"])

"""Tests for legacy VTK structured-points files."""

from pathlib import Path

import numpy as np
import pytest

from tedium.sem.core.exceptions import ConversionError, InvalidSpecError, OutputError
from tedium.sem.io.vtk import lattice_geometry, read_structured_points, write_structured_points
from tedium.sem.tensor.grid import Grid2, Grid3


def test_lattice_geometry() -> None:
    """Test origin and index spacing per direction."""
    origin, spacing = lattice_geometry([[-1.0, -0.2, 1.0], [0.0, 2.0], [5.0]])
    assert origin == (-1.0, 0.0, 5.0)
    assert spacing == (1.0, 2.0, 1.0)


def test_write_header_and_order(tmp_path: Path) -> None:
    """Test the header lines and x-fastest data order."""
    values = np.zeros((3, 2, 2))
    for i in range(3):
        for j in range(2):
            for k in range(2):
                values[i, j, k] = i + 10 * j + 100 * k
    path = write_structured_points(tmp_path / "phi.vtk", Grid3(values), (-1.0, -1.0, -1.0), (1.0, 2.0, 2.0))
    lines = path.read_text(encoding="ascii").splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[2:10] == [
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS 3 2 2",
        "ORIGIN -1 -1 -1",
        "SPACING 1 2 2",
        "POINT_DATA 12",
        "SCALARS phi float 1",
        "LOOKUP_TABLE default",
    ]
    assert [float(v) for v in lines[10:16]] == [0.0, 1.0, 2.0, 10.0, 11.0, 12.0]
    assert len(lines) == 22


def test_round_trip_3d(tmp_path: Path, rng: np.random.Generator) -> None:
    """Test reading back what was written."""
    field = Grid3(rng.standard_normal((4, 3, 2)))
    path = write_structured_points(tmp_path / "f.vtk", field, (0.0, 0.5, 1.0), (0.1, 0.2, 0.3), name="mu")
    data = read_structured_points(path)
    assert data.dims == (4, 3, 2)
    assert data.origin == (0.0, 0.5, 1.0)
    assert data.spacing == (0.1, 0.2, 0.3)
    assert data.name == "mu"
    np.testing.assert_allclose(data.values, field.vec(), rtol=1e-8)


def test_2d_field_gets_unit_depth(tmp_path: Path) -> None:
    """Test 2D fields are written as one z layer."""
    path = write_structured_points(tmp_path / "p.vtk", Grid2.full((2, 3), 0.5), (0.0, 0.0), (1.0, 1.0))
    data = read_structured_points(path)
    assert data.dims == (2, 3, 1)
    assert data.spacing == (1.0, 1.0, 1.0)
    np.testing.assert_array_equal(data.values, np.full(6, 0.5))


def test_write_invalid(tmp_path: Path) -> None:
    """Test geometry and name checks."""
    field = Grid2.zeros((2, 2))
    with pytest.raises(InvalidSpecError):
        write_structured_points(tmp_path / "x.vtk", field, (0.0,), (1.0, 1.0))
    with pytest.raises(InvalidSpecError):
        write_structured_points(tmp_path / "x.vtk", field, (0.0, 0.0), (1.0, 1.0), name="two words")


def test_read_malformed(tmp_path: Path) -> None:
    """Test files that are not structured points are rejected."""
    bad = tmp_path / "bad.vtk"
    bad.write_text("hello\n", encoding="ascii")
    with pytest.raises(ConversionError):
        read_structured_points(bad)
    path = write_structured_points(tmp_path / "ok.vtk", Grid2.zeros((2, 2)), (0.0, 0.0), (1.0, 1.0))
    lines = path.read_text(encoding="ascii").splitlines()
    truncated = tmp_path / "short.vtk"
    truncated.write_text("\n".join(lines[:-1]) + "\n", encoding="ascii")
    with pytest.raises(ConversionError):
        read_structured_points(truncated)
    renamed = tmp_path / "grid.vtk"
    renamed.write_text("\n".join(lines).replace("STRUCTURED_POINTS", "RECTILINEAR_GRID") + "\n", encoding="ascii")
    with pytest.raises(ConversionError):
        read_structured_points(renamed)


def test_write_missing_directory(tmp_path: Path) -> None:
    """Test an unwritable target raises OutputError."""
    target = tmp_path / "missing" / "phi.vtk"
    with pytest.raises(OutputError) as excinfo:
        write_structured_points(target, Grid2.zeros((2, 2)), (0.0, 0.0), (1.0, 1.0))
    assert excinfo.value.context["path"] == str(target)

"""Legacy ASCII VTK STRUCTURED_POINTS files for nodal scalar fields.

STRUCTURED_POINTS describes a uniform lattice. GLL nodes are not uniform,
so the written geometry places node (i, j, k) at origin + (i, j, k) *
spacing with the spacing of the node index lattice; it is exact in index
space and approximate in physical space.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from tedium.sem.core.base import FrozenRecord, frozen_array
from tedium.sem.core.exceptions import ConversionError, InvalidSpecError, OutputError
from tedium.sem.tensor.grid import NodalArray

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class StructuredPoints(FrozenRecord):
    """Contents of a STRUCTURED_POINTS file; ``values`` is x-fastest."""

    _fields = ("dims", "origin", "spacing", "name", "values")

    dims: Tuple[int, int, int]
    origin: Tuple[float, float, float]
    spacing: Tuple[float, float, float]
    name: str
    values: npt.NDArray[np.float64]

    def __init__(
        self,
        *,
        dims: Sequence[int],
        origin: Sequence[float],
        spacing: Sequence[float],
        name: str,
        values: npt.ArrayLike,
    ) -> None:
        super().__init__(
            dims=tuple(int(n) for n in dims),
            origin=tuple(float(x) for x in origin),
            spacing=tuple(float(h) for h in spacing),
            name=name,
            values=frozen_array(values),
        )

    def validate(self) -> None:
        if len(self.dims) != 3 or len(self.origin) != 3 or len(self.spacing) != 3:
            raise InvalidSpecError("dims", self.dims, "STRUCTURED_POINTS is three dimensional")
        if self.values.size != int(np.prod(self.dims)):
            raise InvalidSpecError("values", self.values.size, f"expected {int(np.prod(self.dims))} entries")


def _padded(values: Sequence[float], fill: float) -> Tuple[float, float, float]:
    padded = list(values) + [fill] * (3 - len(values))
    return padded[0], padded[1], padded[2]


def lattice_geometry(nodes: Sequence[npt.ArrayLike]) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Origin and index-lattice spacing (b - a) / (N - 1) per direction."""
    origin: List[float] = []
    spacing: List[float] = []
    for axis in nodes:
        x = np.asarray(axis, dtype=np.float64)
        origin.append(float(x[0]))
        spacing.append(float(x[-1] - x[0]) / (x.size - 1) if x.size > 1 else 1.0)
    return tuple(origin), tuple(spacing)


def write_structured_points(
    path: PathLike,
    phi: NodalArray,
    origin: Sequence[float],
    spacing: Sequence[float],
    name: str = "phi",
    title: str = "tedium-sem nodal field",
) -> Path:
    """Write a 2D or 3D nodal field; 2D fields get a unit third dimension.

    Args:
        path: Output file
        phi: Field to write
        origin: Lattice origin per direction
        spacing: Lattice spacing per direction
        name: SCALARS array name
        title: Header comment line

    Returns:
        The path written
    """
    if len(origin) != len(phi.dims) or len(spacing) != len(phi.dims):
        raise InvalidSpecError("origin", tuple(origin), f"need one entry per direction of {phi.dims}")
    if not name or any(c.isspace() for c in name):
        raise InvalidSpecError("name", name, "must be a non-empty word")
    dims = tuple(phi.dims) + (1,) * (3 - len(phi.dims))
    org = _padded(origin, 0.0)
    spc = _padded(spacing, 1.0)
    target = Path(path)
    header = "\n".join(
        [
            "# vtk DataFile Version 3.0",
            title.replace("\n", " ")[:255],
            "ASCII",
            "DATASET STRUCTURED_POINTS",
            "DIMENSIONS {} {} {}".format(*dims),
            "ORIGIN {:.17g} {:.17g} {:.17g}".format(*org),
            "SPACING {:.17g} {:.17g} {:.17g}".format(*spc),
            f"POINT_DATA {phi.size}",
            f"SCALARS {name} float 1",
            "LOOKUP_TABLE default",
        ]
    )
    try:
        with target.open("w", encoding="ascii") as fh:
            np.savetxt(fh, phi.vec(), fmt="%.9g", header=header, comments="")
    except OSError as e:
        raise OutputError(str(target), e.strerror or str(e)) from e
    logger.debug("wrote %s (%s)", target, "x".join(str(n) for n in dims))
    return target


def _keyword(lines: List[str], index: int, keyword: str) -> List[str]:
    if index >= len(lines) or not lines[index].upper().startswith(keyword):
        found = lines[index] if index < len(lines) else "<end of file>"
        raise ConversionError(f"expected {keyword} at line {index + 1}, got {found!r}", found, StructuredPoints)
    return lines[index].split()[1:]


def read_structured_points(path: PathLike) -> StructuredPoints:
    """Parse a file written by :func:`write_structured_points`.

    Raises:
        ConversionError: If the file is not ASCII STRUCTURED_POINTS scalar data
    """
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if len(lines) < 10 or not lines[0].startswith("# vtk DataFile"):
        raise ConversionError("not a legacy VTK file", lines[:1], StructuredPoints)
    if lines[2].strip().upper() != "ASCII":
        raise ConversionError("only ASCII files are supported", lines[2], StructuredPoints)
    _keyword(lines, 3, "DATASET STRUCTURED_POINTS")
    try:
        dims = [int(v) for v in _keyword(lines, 4, "DIMENSIONS")]
        origin = [float(v) for v in _keyword(lines, 5, "ORIGIN")]
        spacing = [float(v) for v in _keyword(lines, 6, "SPACING")]
        count = int(_keyword(lines, 7, "POINT_DATA")[0])
    except (ValueError, IndexError) as e:
        raise ConversionError(f"malformed header in {path}", lines[4:8], StructuredPoints) from e
    scalars = _keyword(lines, 8, "SCALARS")
    _keyword(lines, 9, "LOOKUP_TABLE")
    try:
        values = np.array(" ".join(lines[10:]).split(), dtype=np.float64)
    except ValueError as e:
        raise ConversionError(f"non-numeric data in {path}", None, StructuredPoints) from e
    if values.size != count:
        raise ConversionError(f"expected {count} values, found {values.size}", values.size, StructuredPoints)
    return StructuredPoints(dims=dims, origin=origin, spacing=spacing, name=scalars[0], values=values)

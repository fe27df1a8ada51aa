"""Run configuration for the command line.

Values come from three layers, later layers winning: per-command defaults,
an optional ``key=value`` file, and explicit flags. Every value goes through
the converter registered for its key, so a file and a flag spelling the same
setting are parsed identically.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from tedium.sem.core.base import FrozenRecord
from tedium.sem.core.exceptions import ConfigError, ConversionError
from tedium.sem.discretization.sem1d import BoundaryCondition

logger = logging.getLogger(__name__)

COMMANDS = ("poisson", "schrodinger", "ch", "compare", "bench")


def parse_int_list(raw: str) -> Tuple[int, ...]:
    """``"4,8,16"`` -> (4, 8, 16)."""
    try:
        values = tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError as e:
        raise ConversionError(f"expected comma-separated integers, got {raw!r}", raw, tuple) from e
    if not values:
        raise ConversionError("expected at least one integer", raw, tuple)
    return values


def parse_float_list(raw: str) -> Tuple[float, ...]:
    """``"0,0.1,0.2"`` -> (0.0, 0.1, 0.2)."""
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError as e:
        raise ConversionError(f"expected comma-separated numbers, got {raw!r}", raw, tuple) from e


def parse_domain(raw: str) -> Tuple[float, float]:
    """``"-1:1"`` -> (-1.0, 1.0)."""
    parts = raw.split(":")
    try:
        if len(parts) != 2:
            raise ValueError(raw)
        a, b = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise ConversionError(f"expected a:b, got {raw!r}", raw, tuple) from e
    return a, b


def parse_centers(raw: str) -> Tuple[Tuple[float, ...], ...]:
    """``"0,0,0.37;0,0,-0.37"`` -> ((0, 0, 0.37), (0, 0, -0.37))."""
    try:
        centers = tuple(tuple(float(v) for v in chunk.split(",")) for chunk in raw.split(";") if chunk.strip())
    except ValueError as e:
        raise ConversionError(f"expected ';'-separated points, got {raw!r}", raw, tuple) from e
    if not centers:
        raise ConversionError("expected at least one center", raw, tuple)
    return centers


def parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConversionError(f"expected a boolean, got {raw!r}", raw, bool)


def _scalar(kind: Callable[[str], Any], target: type) -> Callable[[str], Any]:
    def convert(raw: str) -> Any:
        try:
            return kind(raw.strip())
        except ValueError as e:
            raise ConversionError(f"cannot convert {raw!r} to {target.__name__}", raw, target) from e

    return convert


def _optional_path(raw: str) -> Optional[Path]:
    return Path(raw.strip()) if raw.strip() else None


CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "dim": _scalar(int, int),
    "order": _scalar(int, int),
    "cells": parse_int_list,
    "bc": lambda raw: BoundaryCondition.parse(raw),
    "alpha": _scalar(float, float),
    "beta": _scalar(float, float),
    "domain": parse_domain,
    "repeat": _scalar(int, int),
    "csv": _optional_path,
    "time_offline": parse_bool,
    "tol": _scalar(float, float),
    "max_iters": _scalar(int, int),
    "shift_fraction": _scalar(float, float),
    "forcing": lambda raw: raw.strip().lower(),
    "history": _optional_path,
    "eps": _scalar(float, float),
    "mobility": _scalar(float, float),
    "dt": _scalar(float, float),
    "steps": _scalar(int, int),
    "stab": _scalar(float, float),
    "radius": _scalar(float, float),
    "centers": parse_centers,
    "snapshots": parse_float_list,
    "vtk_dir": _optional_path,
    "energy_csv": _optional_path,
    "solver": lambda raw: raw.strip().lower(),
    "against": lambda raw: raw.strip().lower(),
    "problem": lambda raw: raw.strip().lower(),
    "sizes": parse_int_list,
    "threads": _scalar(int, int),
    "seed": _scalar(int, int),
}

BASE_DEFAULTS: Dict[str, Any] = {
    "dim": 3,
    "order": 5,
    "cells": (4, 8, 16),
    "bc": BoundaryCondition.NEUMANN,
    "alpha": 1.0,
    "beta": 1.0,
    "domain": (-1.0, 1.0),
    "repeat": 1,
    "csv": None,
    "time_offline": False,
    "tol": 1e-12,
    "max_iters": 2000,
    "shift_fraction": 0.5,
    "forcing": "exact",
    "history": None,
    "eps": 0.02,
    "mobility": 0.02,
    "dt": 0.001,
    "steps": 10000,
    "stab": 2.0,
    "radius": 0.35,
    "centers": ((0.0, 0.0, 0.37), (0.0, 0.0, -0.37)),
    "snapshots": (0.0, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 10.0),
    "vtk_dir": None,
    "energy_csv": None,
    "solver": "sem",
    "against": "fft",
    "problem": "poisson",
    "sizes": (16, 24, 32, 48),
    "threads": None,
    "seed": 0,
}

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "poisson": {},
    "schrodinger": {"bc": BoundaryCondition.PERIODIC, "domain": (-16.0, 16.0), "cells": (10,)},
    "ch": {"cells": (20,)},
    "compare": {"bc": BoundaryCondition.PERIODIC, "order": 1, "cells": (32,), "alpha": 1.0},
    "bench": {"repeat": 20},
}

# compare --problem schrodinger: Q^5 against the second-order grid on [-16, 16]^d
COMPARE_SCHRODINGER_DEFAULTS: Dict[str, Any] = {"domain": (-16.0, 16.0), "order": 5, "cells": (10,)}


class RunConfig(FrozenRecord):
    """Validated settings of one command-line run; see BASE_DEFAULTS for the keys."""

    _fields = ("command",) + tuple(BASE_DEFAULTS)

    command: str
    dim: int
    order: int
    cells: Tuple[int, ...]
    bc: BoundaryCondition
    alpha: float
    beta: float
    domain: Tuple[float, float]
    repeat: int
    csv: Optional[Path]
    time_offline: bool
    tol: float
    max_iters: int
    shift_fraction: float
    forcing: str
    history: Optional[Path]
    eps: float
    mobility: float
    dt: float
    steps: int
    stab: float
    radius: float
    centers: Tuple[Tuple[float, ...], ...]
    snapshots: Tuple[float, ...]
    vtk_dir: Optional[Path]
    energy_csv: Optional[Path]
    solver: str
    against: str
    problem: str
    sizes: Tuple[int, ...]
    threads: Optional[int]
    seed: int

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}", value=self.command)
        if self.dim not in (2, 3):
            raise ConfigError("dim must be 2 or 3", value=self.dim, key="dim")
        for key in ("order", "repeat", "max_iters"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1", value=getattr(self, key), key=key)
        if any(n < 1 for n in self.cells):
            raise ConfigError("cells must be >= 1", value=self.cells, key="cells")
        if self.domain[0] >= self.domain[1]:
            raise ConfigError("domain needs a < b", value=self.domain, key="domain")
        for key in ("alpha", "steps"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be >= 0", value=getattr(self, key), key=key)
        for key in ("eps", "mobility", "dt", "tol", "radius"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key} must be > 0", value=getattr(self, key), key=key)
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1", value=self.threads, key="threads")
        if self.forcing not in ("exact", "discrete"):
            raise ConfigError("forcing must be exact or discrete", value=self.forcing, key="forcing")
        if self.solver not in ("sem", "fft"):
            raise ConfigError("solver must be sem or fft", value=self.solver, key="solver")
        if self.against != "fft":
            raise ConfigError("compare supports --against fft only", value=self.against, key="against")
        if self.problem not in ("poisson", "schrodinger"):
            raise ConfigError("problem must be poisson or schrodinger", value=self.problem, key="problem")
        schrodinger = self.command == "schrodinger" or (self.command == "compare" and self.problem == "schrodinger")
        if schrodinger and not self.beta > 0:
            raise ConfigError("beta must be > 0", value=self.beta, key="beta")
        if self.command == "compare" and self.bc is not BoundaryCondition.PERIODIC:
            raise ConfigError("the DFT comparison covers periodic meshes only", value=self.bc.value, key="bc")
        if self.command == "compare" and self.problem == "poisson" and self.order != 1:
            raise ConfigError("the Poisson DFT comparison covers Q^1 meshes only", value=self.order, key="order")
        if self.command == "ch" and any(len(c) != self.dim for c in self.centers):
            raise ConfigError(f"centers need {self.dim} coordinates", value=self.centers, key="centers")


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read ``key = value`` lines; blank lines and ``#`` comments are skipped.

    Raises:
        ConfigError: If the file is missing or a line has no ``=``
    """
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {source}: {e.strerror}", value=str(source)) from e
    entries: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{number}: expected key=value", value=line, line=number)
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def convert_entries(entries: Mapping[str, str]) -> Dict[str, Any]:
    """Apply the registered converter to each raw entry.

    Raises:
        ConfigError: For keys without a converter
        ConversionError: For values the converter rejects
    """
    converted: Dict[str, Any] = {}
    for key, raw in entries.items():
        converter = CONVERTERS.get(key)
        if converter is None:
            raise ConfigError(f"unknown configuration key {key!r}", value=key, known=sorted(CONVERTERS))
        converted[key] = converter(raw)
    return converted


def build_run_config(
    command: str,
    flags: Mapping[str, Any],
    config_file: Optional[Union[str, Path]] = None,
) -> RunConfig:
    """Merge defaults, the optional file and explicit flags (None means unset).

    Args:
        command: Subcommand name
        flags: Already converted flag values keyed like CONVERTERS
        config_file: Optional key=value file

    Returns:
        The validated configuration
    """
    if command not in COMMAND_DEFAULTS:
        raise ConfigError(f"unknown command {command!r}", value=command)
    values: Dict[str, Any] = dict(BASE_DEFAULTS)
    values.update(COMMAND_DEFAULTS[command])
    explicit: Dict[str, Any] = {}
    if config_file is not None:
        explicit.update(convert_entries(read_config_file(config_file)))
        logger.debug("config file %s sets %s", config_file, sorted(explicit))
    explicit.update({key: value for key, value in flags.items() if key in CONVERTERS and value is not None})
    values.update(explicit)
    if command == "compare" and values["problem"] == "schrodinger":
        values.update({k: v for k, v in COMPARE_SCHRODINGER_DEFAULTS.items() if k not in explicit})
    if command == "ch" and values["dim"] == 2 and values["centers"] == BASE_DEFAULTS["centers"]:
        # planar run: keep the x and z coordinates of the default droplets
        values["centers"] = tuple(c[::2] for c in BASE_DEFAULTS["centers"])
    return RunConfig(command=command, **values)

"""Tests for layered command-line configuration."""

from pathlib import Path

import pytest

from tedium.sem.cli.config import (
    BASE_DEFAULTS,
    build_run_config,
    convert_entries,
    parse_bool,
    parse_centers,
    parse_domain,
    parse_float_list,
    parse_int_list,
    read_config_file,
)
from tedium.sem.core.exceptions import ConfigError, ConversionError
from tedium.sem.discretization.sem1d import BoundaryCondition


def test_parse_lists() -> None:
    """Test comma-separated values."""
    assert parse_int_list("4,8,16") == (4, 8, 16)
    assert parse_int_list("32") == (32,)
    assert parse_float_list("0, 0.1,0.2") == (0.0, 0.1, 0.2)
    with pytest.raises(ConversionError):
        parse_int_list("4,x")
    with pytest.raises(ConversionError):
        parse_int_list(",")
    with pytest.raises(ConversionError):
        parse_float_list("a")


def test_parse_domain_and_centers() -> None:
    """Test intervals and point lists."""
    assert parse_domain("-16:16") == (-16.0, 16.0)
    with pytest.raises(ConversionError):
        parse_domain("-1,1")
    assert parse_centers("0,0,0.37;0,0,-0.37") == ((0.0, 0.0, 0.37), (0.0, 0.0, -0.37))
    with pytest.raises(ConversionError):
        parse_centers("0,a")
    with pytest.raises(ConversionError):
        parse_centers(";")


def test_parse_bool() -> None:
    """Test accepted spellings."""
    assert parse_bool("Yes") is True
    assert parse_bool("0") is False
    with pytest.raises(ConversionError):
        parse_bool("maybe")


def test_command_defaults() -> None:
    """Test per-command defaults over the base defaults."""
    poisson = build_run_config("poisson", {})
    assert poisson.order == 5
    assert poisson.cells == (4, 8, 16)
    assert poisson.bc is BoundaryCondition.NEUMANN
    schrodinger = build_run_config("schrodinger", {})
    assert schrodinger.bc is BoundaryCondition.PERIODIC
    assert schrodinger.domain == (-16.0, 16.0)
    compare = build_run_config("compare", {})
    assert (compare.order, compare.bc) == (1, BoundaryCondition.PERIODIC)
    assert build_run_config("bench", {}).repeat == 20


def test_compare_schrodinger_defaults(tmp_path: Path) -> None:
    """Test the PCG comparison gets its own defaults unless a value is given."""
    cfg = build_run_config("compare", {"problem": "schrodinger"})
    assert (cfg.domain, cfg.order, cfg.cells) == ((-16.0, 16.0), 5, (10,))
    assert cfg.bc is BoundaryCondition.PERIODIC
    path = tmp_path / "run.cfg"
    path.write_text("order = 3\n", encoding="utf-8")
    cfg = build_run_config("compare", {"problem": "schrodinger", "cells": (6,)}, path)
    assert (cfg.domain, cfg.order, cfg.cells) == ((-16.0, 16.0), 3, (6,))
    assert build_run_config("compare", {}).problem == "poisson"


def test_planar_ch_centers() -> None:
    """Test a 2D run keeps the x and z coordinates of the default droplets."""
    cfg = build_run_config("ch", {"dim": 2})
    assert cfg.centers == ((0.0, 0.37), (0.0, -0.37))
    assert build_run_config("ch", {}).centers == BASE_DEFAULTS["centers"]


def test_read_config_file(tmp_path: Path) -> None:
    """Test comments, blank lines and dashed keys."""
    path = tmp_path / "run.cfg"
    path.write_text("# accuracy study\norder = 3  # cubic\n\nmax-iters=50\n", encoding="utf-8")
    assert read_config_file(path) == {"order": "3", "max_iters": "50"}


def test_read_config_file_errors(tmp_path: Path) -> None:
    """Test missing files and lines without '='."""
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.cfg")
    path = tmp_path / "bad.cfg"
    path.write_text("order 3\n", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        read_config_file(path)
    assert excinfo.value.context["line"] == 1


def test_convert_entries() -> None:
    """Test converters run per key and unknown keys fail."""
    assert convert_entries({"cells": "2,4", "bc": "Dirichlet"}) == {
        "cells": (2, 4),
        "bc": BoundaryCondition.DIRICHLET,
    }
    with pytest.raises(ConfigError):
        convert_entries({"colour": "red"})


def test_layering(tmp_path: Path) -> None:
    """Test flags override the file, which overrides defaults."""
    path = tmp_path / "run.cfg"
    path.write_text("order = 3\ncells = 2,4\nalpha = 0.5\n", encoding="utf-8")
    cfg = build_run_config("poisson", {"order": 4, "alpha": None}, path)
    assert cfg.order == 4
    assert cfg.cells == (2, 4)
    assert cfg.alpha == 0.5


@pytest.mark.parametrize(
    "command,flags",
    [
        ("poisson", {"dim": 4}),
        ("poisson", {"order": 0}),
        ("poisson", {"domain": (1.0, -1.0)}),
        ("poisson", {"threads": 0}),
        ("schrodinger", {"beta": 0.0}),
        ("schrodinger", {"forcing": "fuzzy"}),
        ("bench", {"solver": "cuda"}),
        ("compare", {"order": 5}),
        ("compare", {"bc": BoundaryCondition.NEUMANN}),
        ("compare", {"problem": "helmholtz"}),
        ("compare", {"problem": "schrodinger", "beta": 0.0}),
        ("compare", {"problem": "schrodinger", "bc": BoundaryCondition.NEUMANN}),
        ("ch", {"centers": ((0.0, 0.0),)}),
    ],
)
def test_invalid_configs(command: str, flags: dict) -> None:
    """Test validation failures are configuration errors."""
    with pytest.raises(ConfigError):
        build_run_config(command, flags)


def test_unknown_command() -> None:
    """Test an unknown command is rejected."""
    with pytest.raises(ConfigError):
        build_run_config("plot", {})

"""Test configuration for tedium-sem."""

from typing import Iterator

import numpy as np
import pytest

from tedium.sem.core.config import configure


@pytest.fixture(autouse=True)
def single_thread() -> Iterator[None]:
    """Run every test with one worker thread and restore it afterwards."""
    configure(threads=1)
    yield
    configure(threads=1)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for random right-hand sides."""
    return np.random.default_rng(20240229)

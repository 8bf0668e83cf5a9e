"""Shared fixtures for the markov-embed test suite."""

from pathlib import Path

import numpy as np
import pytest

from markov_embed import catalog
from markov_embed.io import format_matrix


@pytest.fixture
def example_one():
    return catalog.example_one()


@pytest.fixture
def twogen():
    return catalog.twogen_matrix()


@pytest.fixture
def cyclic_five():
    return catalog.cyclic_five_matrix()


@pytest.fixture
def negative_spectrum():
    return catalog.negative_spectrum_matrix()


@pytest.fixture
def matrix_file(tmp_path: Path):
    """Write a matrix to tmp_path/<name> in the format given by the extension."""

    def write(name: str, values) -> Path:
        path = tmp_path / name
        fmt = "json" if path.suffix == ".json" else "csv"
        path.write_text(format_matrix(np.asarray(values, dtype=float), fmt))
        return path

    return write

"""Shared fixtures: bundled iris data, a prepared iris experiment, paths."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gbssl.datasets import builtin_iris_path, load_csv_dataset
from gbssl.harness import ExperimentConfig, prepare

IRIS_MAP = {"setosa": 0, "versicolor": 1, "virginica": 2}


def external_data_dir() -> Path:
    """Directory searched for datasets that cannot be bundled (size/license).

    Override with GBSSL_DATA_DIR; defaults to <repo>/data.
    """
    default = Path(__file__).resolve().parent.parent / "data"
    return Path(os.environ.get("GBSSL_DATA_DIR", default))


@pytest.fixture(scope="session")
def iris_dataset():
    return load_csv_dataset(builtin_iris_path(), -1, IRIS_MAP, name="iris")


@pytest.fixture(scope="session")
def iris_prepared():
    """Iris with its reference graph (k=5, sigma=0.26), shared across tests."""
    return prepare(ExperimentConfig(dataset="iris", runs=1))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return external_data_dir()

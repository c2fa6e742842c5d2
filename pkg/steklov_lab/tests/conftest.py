# tests/conftest.py

import json
import os

import pytest

from steklov_lab.geometry import build_quadrature, curve_from_spec
from steklov_lab.layer import assemble_boundary_ops

TEST_N = 64


@pytest.fixture(scope="session")
def criteria():
    """Pass thresholds shared by the numerical tests."""
    path = os.path.join(os.path.dirname(__file__), "test_config.json")
    with open(path) as fh:
        return json.load(fh)["criteria"]


@pytest.fixture(scope="session")
def disk():
    return curve_from_spec("disk")


@pytest.fixture(scope="session")
def kite():
    return curve_from_spec("kite")


@pytest.fixture(scope="session")
def disk_ops(disk):
    return assemble_boundary_ops(disk, build_quadrature(disk, TEST_N))


@pytest.fixture(scope="session")
def kite_ops(kite):
    return assemble_boundary_ops(kite, build_quadrature(kite, TEST_N))

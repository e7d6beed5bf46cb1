"""
Shared fixtures for the levylab tests
Acceptance-scale runs are marked slow and only run with --run-slow
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from levylab.core.monitoring import DiagnosticsLog
from levylab.numerics.grid import GridFunction, TorusGrid
from levylab.problem import catalog


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --run-slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid64():
    return TorusGrid(1, 64)


@pytest.fixture
def grid32():
    return TorusGrid(1, 32)


@pytest.fixture
def grid2d():
    return TorusGrid(2, 16)


@pytest.fixture
def eikonal():
    return catalog.eikonal()


@pytest.fixture
def mixed():
    return catalog.mixed()


@pytest.fixture
def first_order():
    return catalog.first_order_eikonal()


@pytest.fixture
def constant_source():
    return catalog.constant_source(0.5)


@pytest.fixture
def diagnostics():
    return DiagnosticsLog()


@pytest.fixture
def cosine(grid64):
    return GridFunction.from_function(grid64, lambda x: np.cos(2.0 * np.pi * x[:, 0]))

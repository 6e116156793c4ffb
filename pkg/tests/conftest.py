"""Shared test configuration and fixtures.

Benchmarks that check the Ackley and Burgers error levels take minutes; they are
marked ``slow`` and only run with ``pytest --runslow``.
"""

import numpy as np
import pytest

from problems import GridSpec, Problem
from sampling import UncertainInput, UncertainParameter
from splines import build_space


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow benchmark tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: benchmark test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def unit_inputs(m: int) -> UncertainInput:
    """m independent inputs uniform on [0, 1] (physical == unit)."""
    return UncertainInput(tuple(
        UncertainParameter(name=f"xi{i + 1}", lower=0.0, upper=1.0) for i in range(m)
    ))


def toy_problem(m: int = 2, n_nodes: int = 12, n_times: int = 4) -> Problem:
    """Smooth separable model u(x, t; xi) on a small grid.

    Degree 1 in every xi_i, so any space with p >= 1 reproduces it.
    """
    grid = GridSpec(
        extents=((0.0, 1.0),),
        counts=(n_nodes,),
        times=tuple(float(j + 1) / n_times for j in range(n_times)),
    )
    x = grid.axes()[0][:, None]
    t = np.array(grid.times)[None, :]

    def field(eta: np.ndarray) -> np.ndarray:
        u = np.sin(np.pi * x) * (1.0 + t)
        for i, value in enumerate(eta):
            u = u + value * np.cos((i + 1) * x) * np.exp(-t * (i + 1))
        return u

    return Problem(name="toy", grid=grid, inputs=unit_inputs(m), evaluator=field)


@pytest.fixture
def inputs_2d() -> UncertainInput:
    return unit_inputs(2)


@pytest.fixture
def space_2d():
    return build_space((2, 1), (3, 2))


@pytest.fixture
def toy() -> Problem:
    return toy_problem()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

"""Benchmark error levels of the Ackley and Burgers cases against sampled references.

Every test here is marked ``slow``; run with ``pytest --runslow``. Each module
fixture builds its reference statistics once.
"""

import time

import pytest

from baselines import pce_fit, pce_statistics, reference_statistics
from metrics import error_report
from pod import SnapshotMatrix, two_step_pod
from problems import ackley_problem, burgers_problem
from rom import offline, statistics
from sampling import bounds_from_moments, lhs_sample
from splines import build_space

pytestmark = pytest.mark.slow

SEED = 2024
# Reference seed of the mean-200 Burgers case, shared with configs/burgers_200.yaml.
BURGERS_200_SEED = 7


def _surrogate_errors(problem, degree, nx, eps, reference):
    space = build_space((degree,) * problem.inputs.m, (nx,) * problem.inputs.m)
    surrogate = offline(
        problem.evaluate, problem.inputs, space, eps, eps, SEED,
        times=problem.times, problem=problem.name, grid=problem.grid,
    )
    return error_report("pod-bsbem", statistics(surrogate), reference, problem.times)


@pytest.fixture(scope="module")
def ackley_case():
    problem = ackley_problem()
    reference = reference_statistics(problem.evaluate, problem.inputs, 50_000, "lhs", SEED)
    return problem, reference


@pytest.fixture(scope="module")
def burgers_low():
    problem = burgers_problem(*bounds_from_moments(200.0, 0.25))
    started = time.perf_counter()
    reference = reference_statistics(
        problem.evaluate, problem.inputs, 100_000, "mc", BURGERS_200_SEED
    )
    return problem, reference, time.perf_counter() - started


@pytest.fixture(scope="module")
def burgers_high():
    problem = burgers_problem(*bounds_from_moments(800.0, 0.25))
    started = time.perf_counter()
    reference = reference_statistics(problem.evaluate, problem.inputs, 100_000, "mc", SEED)
    return problem, reference, time.perf_counter() - started


# ---------------------------------------------------------------------------
# TestAckleyBenchmark
# ---------------------------------------------------------------------------

class TestAckleyBenchmark:
    """Steady three-input Ackley field against a 50,000-point LHS reference."""

    def test_error_levels(self, ackley_case):
        """p=2, nx=5, eps=1e-10: mean error <= 1e-4 and std error <= 5e-3."""
        problem, reference = ackley_case
        report = _surrogate_errors(problem, 2, 5, 1e-10, reference)
        assert report.mean_max <= 1e-4
        assert report.std_max <= 5e-3

    def test_refinement_helps(self, ackley_case):
        """The std error at nx=5 should not exceed the one at nx=2."""
        problem, reference = ackley_case
        coarse = _surrogate_errors(problem, 2, 2, 1e-10, reference)
        fine = _surrogate_errors(problem, 2, 5, 1e-10, reference)
        assert fine.std_max <= coarse.std_max


# ---------------------------------------------------------------------------
# TestBurgersBenchmark
# ---------------------------------------------------------------------------

class TestBurgersBenchmark:
    """Viscous Burgers at two Reynolds ranges against 10^5 MC samples."""

    @pytest.mark.parametrize("case, std_tolerance", [
        ("burgers_low", 2e-3),
        ("burgers_high", 5e-3),
    ])
    def test_error_levels(self, request, case, std_tolerance):
        """p=2, nx=10, eps=1e-10: mean error <= 1e-4 and std within tolerance."""
        problem, reference, _ = request.getfixturevalue(case)
        report = _surrogate_errors(problem, 2, 10, 1e-10, reference)
        assert report.mean_max <= 1e-4
        assert report.std_max <= std_tolerance

    @pytest.mark.parametrize("case", ["burgers_low", "burgers_high"])
    def test_tighter_tolerance_is_never_worse(self, request, case):
        """Std errors should be ordered 1e-10 <= 1e-5 <= 1e-3."""
        problem, reference, _ = request.getfixturevalue(case)
        errors = [
            _surrogate_errors(problem, 2, 10, eps, reference).std_max
            for eps in (1e-10, 1e-5, 1e-3)
        ]
        assert errors[0] <= errors[1] <= errors[2]

    def test_mode_count_from_latin_hypercube(self):
        """300 LHS trajectories at mean 800 with eps = 1e-10 should keep 76 +- 10% modes."""
        problem = burgers_problem(*bounds_from_moments(800.0, 0.25))
        sample = lhs_sample(1, 300, SEED, problem.inputs)
        snapshots = SnapshotMatrix.from_fields(
            [problem.evaluate(eta) for eta in sample.physical_points]
        )
        basis = two_step_pod(snapshots, 1e-10, 1e-10)
        assert 68 <= basis.n_modes <= 84

    def test_full_pce_baseline(self, burgers_low):
        """Order-6 PCE with twice-oversampled regression lands in the reported band."""
        problem, reference, _ = burgers_low
        expansion = pce_fit(problem.evaluate, problem.inputs, 6, 2, BURGERS_200_SEED)
        report = error_report("full-pce", pce_statistics(expansion), reference, problem.times)
        assert 1e-6 <= report.mean_max <= 1e-4
        assert 1e-4 <= report.std_max <= 2e-3

    def test_speedup_over_sampling(self, burgers_high):
        """Offline plus online should run at least ten times faster than the MC loop."""
        problem, _, reference_time = burgers_high
        space = build_space((2,), (10,))
        started = time.perf_counter()
        surrogate = offline(
            problem.evaluate, problem.inputs, space, 1e-10, 1e-10, SEED, times=problem.times
        )
        statistics(surrogate)
        surrogate_time = time.perf_counter() - started
        assert reference_time >= 10.0 * surrogate_time

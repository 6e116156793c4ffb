"""Offline and online stages of the POD-BSBEM surrogate.

Offline: sample collocation points element by element, evaluate the model,
compress the snapshots with the two-step and third-level POD, fit the
reduced coefficients with local B-spline regressions and assemble them into
one global system per (mode, temporal mode).

Online: locate the element of a unit point, gather its coefficients through
the IEN table and expand back through the temporal and spatial modes.
Statistics integrate that expansion element by element with Gauss–Legendre
quadrature instead of sampling it.
"""

import logging
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import scipy.linalg
from scipy.sparse import coo_matrix

from config import (
    ARTIFACT_VERSION,
    DESIGN_MATCH_RTOL,
    EVAL_CHUNK_SIZE,
    NEGATIVE_VARIANCE_TOLERANCE,
    SURROGATE_FORMAT_VERSION,
)
from exceptions import NumericalError, SurrogateFormatError
from export import metadata_path, read_file_pair, write_file_pair
from pod import (
    PodBasis,
    SnapshotMatrix,
    TemporalModes,
    project_coefficients,
    reshape_mode_row,
    third_level_pod,
    two_step_pod,
)
from problems import GridSpec
from sampling import (
    SampleSet,
    UncertainInput,
    UncertainParameter,
    element_collocation_points,
)
from splines import (
    BSplineSpace,
    build_space,
    element_quadrature,
    eval_basis_batch,
    eval_element_basis,
)

logger = logging.getLogger(__name__)

SURROGATE_FORMAT_NAME = "pod-bsbem-surrogate"

Model = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Hyperparameters:
    """Settings a surrogate was built with (recorded in its file)."""

    eps_t: float
    eps_s: float
    degrees: tuple[int, ...]
    elements: tuple[int, ...]
    oversample: int
    seed: int


@dataclass
class BuildTimings:
    """Wall time per offline phase, in seconds."""

    sampling: float = 0.0
    model_evaluation: float = 0.0
    pod: float = 0.0
    regression: float = 0.0

    @property
    def total(self) -> float:
        return self.sampling + self.model_evaluation + self.pod + self.regression


@dataclass(frozen=True, eq=False)
class Surrogate:
    """A trained POD-BSBEM surrogate.

    Attributes:
        basis: Spatial POD basis Phi ``(n_nodes, L)``.
        temporal: Temporal modes X^l ``(n_times, K_l)`` per spatial mode.
        coefficients: Per spatial mode l the global coefficients
            ``(M, K_l)``; column k is alpha_k^l.
        space: B-spline space of the regressions.
        inputs: Uncertain inputs, for physical/unit conversion.
        times: Time grid ``(n_times,)``.
        hyperparameters: Build settings.
        n_snapshots: Number of model evaluations N_s used for training.
        rank_deficient: True when a global solve fell back to least squares.
        problem: Problem id.
        grid: Spatial grid, when known.
        config_hash: Hash of the run configuration that built it.
        timings: Offline wall times (not serialized).
    """

    basis: PodBasis
    temporal: TemporalModes
    coefficients: tuple[np.ndarray, ...]
    space: BSplineSpace
    inputs: UncertainInput
    times: np.ndarray
    hyperparameters: Hyperparameters
    n_snapshots: int
    rank_deficient: bool = False
    problem: str = "external"
    grid: GridSpec | None = None
    config_hash: str = ""
    timings: BuildTimings = field(default_factory=BuildTimings)

    @property
    def n_nodes(self) -> int:
        return self.basis.modes.shape[0]

    @property
    def n_times(self) -> int:
        return self.times.shape[0]

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    @cached_property
    def alpha(self) -> np.ndarray:
        """All coefficient vectors side by side ``(M, R)``, R = sum K_l."""
        return np.hstack(self.coefficients)

    @cached_property
    def temporal_operator(self) -> np.ndarray:
        """Map ``(R, L * n_times)`` from reduced outputs to B-hat rows.

        Row r (mode l, temporal mode k) holds X^l[:, k] in the block of
        spatial mode l and zeros elsewhere.
        """
        operator = np.zeros((self.alpha.shape[1], self.n_modes, self.n_times))
        offset = 0
        for mode, x in enumerate(self.temporal.modes):
            rank = x.shape[1]
            operator[offset:offset + rank, mode, :] = x.T
            offset += rank
        return operator.reshape(operator.shape[0], -1)


@dataclass(frozen=True, eq=False)
class StatisticsField:
    """Mean and standard deviation ``(n_nodes, n_times)``."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True, eq=False)
class CollocationDesign:
    """Per-element collocation grids concatenated in element order."""

    samples: SampleSet
    points_per_element: int

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def element_rows(self, e: int) -> slice:
        return slice(e * self.points_per_element, (e + 1) * self.points_per_element)


# ---------------------------------------------------------------------------
# Offline stage
# ---------------------------------------------------------------------------


def collocation_design(
    space: BSplineSpace,
    oversample: int = 1,
    inputs: UncertainInput | None = None,
) -> CollocationDesign:
    """Collocation points of every element, in element order."""
    per_element = [
        element_collocation_points(space, e, oversample, inputs)
        for e in range(space.n_elements)
    ]
    samples = SampleSet(
        unit_points=np.vstack([s.unit_points for s in per_element]),
        physical_points=np.vstack([s.physical_points for s in per_element]),
        seed=None,
        scheme="element-collocation",
    )
    return CollocationDesign(samples=samples, points_per_element=len(per_element[0]))


def sample_snapshots(model: Model, design: CollocationDesign, threads: int = 1) -> SnapshotMatrix:
    """Evaluate *model* at every design point; columns follow design order."""
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        fields = list(pool.map(model, design.samples.physical_points))
    logger.info("Evaluated the model at %d collocation points", len(fields))
    return SnapshotMatrix.from_fields(fields)


def local_design(space: BSplineSpace, e: int, collocation: SampleSet) -> np.ndarray:
    """Local design matrix psi^e ``(n_s^e, n_b)`` of element *e*.

    Raises:
        ValueError: If a collocation point lies outside element *e*.
    """
    return eval_element_basis(space, e, collocation.unit_points)


def assemble(
    space: BSplineSpace,
    designs: list[np.ndarray],
    outputs: list[np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """Scatter local normal equations into the global system.

    Args:
        space: The spline space (supplies the IEN table).
        designs: One local design psi^e ``(n_s^e, n_b)`` per element.
        outputs: Local outputs delta^e per element, ``(n_s^e,)`` or
            ``(n_s^e, R)`` for R right-hand sides.

    Returns:
        ``(Psi, Delta)`` with Psi ``(M, M)`` symmetric and Delta ``(M,)`` or
        ``(M, R)``.

    Raises:
        ValueError: On a block count or shape mismatch.
    """
    if len(designs) != space.n_elements or len(outputs) != space.n_elements:
        raise ValueError(
            f"Expected {space.n_elements} local blocks, got {len(designs)} designs "
            f"and {len(outputs)} outputs"
        )
    n_local = space.n_local
    vector_rhs = np.ndim(outputs[0]) == 1
    n_rhs = 1 if vector_rhs else outputs[0].shape[1]

    rows, cols, data = [], [], []
    delta = np.zeros((space.n_global, n_rhs))
    for e, (psi, out) in enumerate(zip(designs, outputs)):
        out = np.asarray(out, dtype=float).reshape(psi.shape[0], -1)
        if psi.ndim != 2 or psi.shape[1] != n_local or out.shape[1] != n_rhs:
            raise ValueError(
                f"Element {e}: design {psi.shape} / outputs {out.shape} do not match "
                f"n_b={n_local}, R={n_rhs}"
            )
        global_ids = space.ien_table[e]
        rows.append(np.repeat(global_ids, n_local))
        cols.append(np.tile(global_ids, n_local))
        data.append((psi.T @ psi).ravel())
        np.add.at(delta, global_ids, psi.T @ out)

    psi_global = coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.n_global, space.n_global),
    ).toarray()
    return psi_global, (delta[:, 0] if vector_rhs else delta)


def solve_global(psi: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, bool]:
    """Solve Psi alpha = Delta.

    Cholesky first; a matrix that is not positive definite falls back to the
    minimum-norm least-squares solution.

    Returns:
        ``(alpha, rank_deficient)``.

    Raises:
        ValueError: On a dimension mismatch.
        NumericalError: If the fallback also fails.
    """
    psi = np.asarray(psi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if psi.ndim != 2 or psi.shape[0] != psi.shape[1] or delta.shape[0] != psi.shape[0]:
        raise ValueError(f"Cannot solve a {psi.shape} system with right-hand side {delta.shape}")
    try:
        factor = scipy.linalg.cho_factor(psi)
        return scipy.linalg.cho_solve(factor, delta), False
    except np.linalg.LinAlgError:
        logger.warning(
            "Global %dx%d matrix is not positive definite; using minimum-norm least squares",
            psi.shape[0], psi.shape[1],
        )
    try:
        alpha, _, rank, _ = scipy.linalg.lstsq(psi, delta, lapack_driver="gelsd")
    except np.linalg.LinAlgError as exc:
        raise NumericalError("solve_global", f"least-squares fallback failed ({exc})") from exc
    if not np.all(np.isfinite(alpha)):
        raise NumericalError("solve_global", "least-squares fallback returned non-finite values")
    logger.warning("Global system solved with rank %d of %d", rank, psi.shape[0])
    return alpha, True


def offline_from_snapshots(
    snapshots: SnapshotMatrix,
    design: CollocationDesign,
    inputs: UncertainInput,
    space: BSplineSpace,
    hyperparameters: Hyperparameters,
    times: np.ndarray,
    threads: int = 1,
    problem: str = "external",
    grid: GridSpec | None = None,
    timings: BuildTimings | None = None,
) -> Surrogate:
    """Build a surrogate from snapshots whose columns follow *design*.

    Raises:
        ValueError: If the snapshot count does not match the design or the
            space and inputs disagree in dimension.
        NumericalError: Propagated from the POD or the global solve.
    """
    if space.m != inputs.m:
        raise ValueError(f"Space has dimension {space.m} but inputs have {inputs.m}")
    if snapshots.n_samples != design.n_samples:
        raise ValueError(
            f"{snapshots.n_samples} snapshot samples for {design.n_samples} collocation points"
        )
    times = np.asarray(times, dtype=float)
    if times.shape != (snapshots.n_times,):
        raise ValueError(f"Time grid has {times.size} entries, snapshots have {snapshots.n_times}")
    timings = timings if timings is not None else BuildTimings()

    started = time.perf_counter()
    basis = two_step_pod(snapshots, hyperparameters.eps_t, hyperparameters.eps_s, threads)
    coefficients = project_coefficients(basis, snapshots)
    temporal_modes = []
    reduced = []
    for mode in range(basis.n_modes):
        beta = reshape_mode_row(coefficients, mode, snapshots.n_times, snapshots.n_samples)
        x, lam = third_level_pod(beta, hyperparameters.eps_s)
        temporal_modes.append(x)
        reduced.append(lam)
    temporal = TemporalModes(tuple(temporal_modes))
    timings.pod = time.perf_counter() - started
    logger.info("Third-level POD: K_l = %s", list(temporal.ranks))

    started = time.perf_counter()
    outputs = np.vstack(reduced).T  # (N_s, R)
    designs = [
        local_design(space, e, _element_samples(design, e)) for e in range(space.n_elements)
    ]
    local_outputs = [outputs[design.element_rows(e)] for e in range(space.n_elements)]
    psi, delta = assemble(space, designs, local_outputs)
    alpha, rank_deficient = solve_global(psi, delta)
    timings.regression = time.perf_counter() - started

    splits = np.cumsum(temporal.ranks)[:-1]
    surrogate = Surrogate(
        basis=basis,
        temporal=temporal,
        coefficients=tuple(np.split(alpha, splits, axis=1)),
        space=space,
        inputs=inputs,
        times=times,
        hyperparameters=hyperparameters,
        n_snapshots=snapshots.n_samples,
        rank_deficient=rank_deficient,
        problem=problem,
        grid=grid,
        timings=timings,
    )
    logger.info(
        "Surrogate built: N_s=%d, L=%d, R=%d, M=%d%s",
        surrogate.n_snapshots, surrogate.n_modes, alpha.shape[1], space.n_global,
        " (rank-deficient)" if rank_deficient else "",
    )
    return surrogate


def _element_samples(design: CollocationDesign, e: int) -> SampleSet:
    rows = design.element_rows(e)
    return SampleSet(
        unit_points=design.samples.unit_points[rows],
        physical_points=design.samples.physical_points[rows],
        seed=None,
        scheme="element-collocation",
    )


def offline(
    model: Model,
    inputs: UncertainInput,
    space: BSplineSpace,
    eps_t: float,
    eps_s: float,
    seed: int,
    oversample: int = 1,
    threads: int = 1,
    times: np.ndarray | None = None,
    problem: str = "external",
    grid: GridSpec | None = None,
) -> Surrogate:
    """Run the whole offline stage for *model*.

    Args:
        model: Maps a physical point eta ``(m,)`` to a field
            ``(n_nodes, n_times)``.
        inputs: Uncertain inputs sharing the dimension of *space*.
        space: B-spline space of the local regressions.
        eps_t: Energy tolerance of the per-trajectory POD.
        eps_s: Energy tolerance of the global and third-level POD.
        seed: Recorded with the surrogate (the collocation grid itself is
            deterministic).
        oversample: Collocation points per dimension as a multiple of p+1.
        threads: Worker count for model evaluation and the first POD step.
        times: Time grid; ``0, 1, ...`` when omitted.
        problem: Problem id recorded with the surrogate.
        grid: Spatial grid recorded with the surrogate.

    Returns:
        The trained ``Surrogate``; its ``timings`` hold the phase wall times.
    """
    timings = BuildTimings()
    started = time.perf_counter()
    design = collocation_design(space, oversample, inputs)
    timings.sampling = time.perf_counter() - started

    started = time.perf_counter()
    snapshots = sample_snapshots(model, design, threads)
    timings.model_evaluation = time.perf_counter() - started

    hyperparameters = Hyperparameters(
        eps_t=float(eps_t),
        eps_s=float(eps_s),
        degrees=space.degrees,
        elements=space.elements,
        oversample=int(oversample),
        seed=int(seed),
    )
    if times is None:
        times = np.arange(snapshots.n_times, dtype=float)
    return offline_from_snapshots(
        snapshots, design, inputs, space, hyperparameters, times,
        threads=threads, problem=problem, grid=grid, timings=timings,
    )


def check_design(design: CollocationDesign, parameters: np.ndarray) -> None:
    """Check an ingested parameter table against the collocation design.

    Raises:
        ValueError: If the table does not reproduce the design points.
    """
    expected = design.samples.physical_points
    if parameters.shape != expected.shape:
        raise ValueError(
            f"parameter table has shape {parameters.shape}, the collocation design "
            f"needs {expected.shape}"
        )
    scale = np.maximum(np.abs(expected), 1.0)
    mismatch = np.abs(parameters - expected) > DESIGN_MATCH_RTOL * scale
    if np.any(mismatch):
        row = int(np.argwhere(mismatch)[0, 0])
        raise ValueError(
            f"sample {row} has parameters {parameters[row].tolist()}, the collocation "
            f"design expects {expected[row].tolist()}"
        )


# ---------------------------------------------------------------------------
# Online stage
# ---------------------------------------------------------------------------


def _reduced_outputs(surrogate: Surrogate, points: np.ndarray) -> np.ndarray:
    """delta-hat ``(n, R)`` at unit points ``(n, m)``."""
    elements, values = eval_basis_batch(surrogate.space, points)
    gathered = surrogate.alpha[surrogate.space.ien_table[elements]]  # (n, n_b, R)
    return np.einsum("nb,nbr->nr", values, gathered)


def evaluate_batch(surrogate: Surrogate, points: np.ndarray) -> np.ndarray:
    """Reduced coefficients B-hat ``(n, L, n_times)`` at unit points ``(n, m)``.

    Raises:
        ValueError: If a point lies outside [0, 1]^m.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    blocks = []
    for start in range(0, points.shape[0], EVAL_CHUNK_SIZE):
        chunk = points[start:start + EVAL_CHUNK_SIZE]
        blocks.append(_reduced_outputs(surrogate, chunk) @ surrogate.temporal_operator)
    flat = np.vstack(blocks)
    return flat.reshape(points.shape[0], surrogate.n_modes, surrogate.n_times)


def evaluate(surrogate: Surrogate, xi: np.ndarray) -> np.ndarray:
    """Surrogate field ``(n_nodes, n_times)`` at one unit point *xi*.

    Raises:
        ValueError: If *xi* lies outside [0, 1]^m.
    """
    b_hat = evaluate_batch(surrogate, np.asarray(xi, dtype=float).reshape(1, -1))[0]
    return surrogate.basis.modes @ b_hat


def probe_spline(surrogate: Surrogate, node: int, time_index: int) -> np.ndarray:
    """Global spline coefficients ``(M,)`` of the output at one node and time.

    Raises:
        IndexError: If *node* or *time_index* is out of range.
    """
    if not 0 <= node < surrogate.n_nodes or not 0 <= time_index < surrogate.n_times:
        raise IndexError(
            f"Probe ({node}, {time_index}) outside {surrogate.n_nodes} nodes x "
            f"{surrogate.n_times} times"
        )
    operator = surrogate.temporal_operator.reshape(-1, surrogate.n_modes, surrogate.n_times)
    weights = operator[:, :, time_index] @ surrogate.basis.modes[node]
    return surrogate.alpha @ weights


def evaluate_scalar_spline(
    space: BSplineSpace,
    coefficients: np.ndarray,
    points: np.ndarray,
) -> np.ndarray:
    """Values ``(n,)`` of the scalar spline sum_j c_j N_j at unit points."""
    elements, values = eval_basis_batch(space, points)
    return np.sum(values * coefficients[space.ien_table[elements]], axis=1)


def statistics(
    surrogate: Surrogate,
    points_per_dim: tuple[int, ...] | list[int] | None = None,
) -> StatisticsField:
    """Mean and standard deviation of the surrogate by element quadrature.

    Args:
        surrogate: The trained surrogate.
        points_per_dim: Gauss points per dimension; at least p_i + 1, which is
            also the default and already integrates u-hat^2 exactly.

    Raises:
        ValueError: If a point count is below p_i + 1.
    """
    space = surrogate.space
    if points_per_dim is None:
        points_per_dim = tuple(p + 1 for p in space.degrees)
    points_per_dim = tuple(int(n) for n in points_per_dim)
    if len(points_per_dim) != space.m or any(
        n < p + 1 for n, p in zip(points_per_dim, space.degrees)
    ):
        raise ValueError(
            f"Quadrature needs at least p_i + 1 = {[p + 1 for p in space.degrees]} "
            f"points per dimension, got {list(points_per_dim)}"
        )

    first = np.zeros((surrogate.n_modes, surrogate.n_times))
    second = np.zeros((surrogate.n_times, surrogate.n_modes, surrogate.n_modes))
    for e in range(space.n_elements):
        rule = element_quadrature(space, e, points_per_dim)
        values = eval_element_basis(space, e, rule.nodes)
        reduced = values @ surrogate.alpha[space.ien_table[e]]
        b_hat = (reduced @ surrogate.temporal_operator).reshape(
            -1, surrogate.n_modes, surrogate.n_times
        )
        first += np.einsum("q,qlt->lt", rule.weights, b_hat)
        second += np.einsum("q,qlt,qmt->tlm", rule.weights, b_hat, b_hat)

    phi = surrogate.basis.modes
    mean = phi @ first
    second_moment = np.einsum("xl,tlm,xm->xt", phi, second, phi, optimize=True)
    variance = second_moment - mean ** 2
    tolerance = NEGATIVE_VARIANCE_TOLERANCE * max(1.0, float(np.max(np.abs(second_moment))))
    if np.any(variance < -tolerance):
        logger.warning(
            "Negative variance down to %.3e clamped to zero", float(np.min(variance))
        )
    return StatisticsField(mean=mean, std=np.sqrt(np.clip(variance, 0.0, None)))


def reconstruct_snapshots(
    surrogate: Surrogate,
    oversample: int = 1,
) -> tuple[CollocationDesign, SnapshotMatrix]:
    """Surrogate approximation of the snapshot matrix on a fresh design."""
    design = collocation_design(surrogate.space, oversample, surrogate.inputs)
    b_hat = evaluate_batch(surrogate, design.samples.unit_points)
    fields = [surrogate.basis.modes @ block for block in b_hat]
    return design, SnapshotMatrix.from_fields(fields)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_surrogate(surrogate: Surrogate, stem: Path | str) -> Path:
    """Write *surrogate* as a versioned metadata/payload file pair.

    Returns:
        The metadata path.
    """
    hyper = surrogate.hyperparameters
    metadata: dict[str, Any] = {
        "format": SURROGATE_FORMAT_NAME,
        "version": SURROGATE_FORMAT_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "problem": surrogate.problem,
        "config_hash": surrogate.config_hash,
        "hyperparameters": asdict(hyper),
        "inputs": [asdict(param) for param in surrogate.inputs.parameters],
        "n_nodes": surrogate.n_nodes,
        "n_times": surrogate.n_times,
        "n_modes": surrogate.n_modes,
        "temporal_ranks": list(surrogate.temporal.ranks),
        "n_global": surrogate.space.n_global,
        "n_snapshots": surrogate.n_snapshots,
        "rank_deficient": surrogate.rank_deficient,
        "pod": {
            "energy": surrogate.basis.energy,
            "n_rank": surrogate.basis.n_rank,
        },
    }
    if surrogate.grid is not None:
        metadata["grid"] = surrogate.grid.to_dict()

    arrays = {
        "times": surrogate.times,
        "modes": surrogate.basis.modes,
        "singular_values": surrogate.basis.singular_values,
        "singular_values_all": surrogate.basis.singular_values_all,
    }
    for mode, x in enumerate(surrogate.temporal.modes):
        arrays[f"temporal_{mode}"] = x
    arrays["alpha"] = surrogate.alpha
    meta_file, _ = write_file_pair(stem, metadata, arrays)
    logger.info("Saved surrogate to %s", meta_file)
    return meta_file


def load_surrogate(stem: Path | str) -> Surrogate:
    """Read a surrogate written by ``save_surrogate``.

    Raises:
        SurrogateFormatError: On a missing file, another format, a version
            mismatch or inconsistent dimensions.
    """
    meta_file = metadata_path(stem)
    document, arrays = read_file_pair(stem, SurrogateFormatError)
    if document.get("format") != SURROGATE_FORMAT_NAME:
        raise SurrogateFormatError(meta_file, f"format must be '{SURROGATE_FORMAT_NAME}'")
    if document.get("version") != SURROGATE_FORMAT_VERSION:
        raise SurrogateFormatError(
            meta_file,
            f"version {document.get('version')} unsupported, expected {SURROGATE_FORMAT_VERSION}",
        )
    try:
        hyper_doc = document["hyperparameters"]
        hyper = Hyperparameters(
            eps_t=float(hyper_doc["eps_t"]),
            eps_s=float(hyper_doc["eps_s"]),
            degrees=tuple(int(p) for p in hyper_doc["degrees"]),
            elements=tuple(int(n) for n in hyper_doc["elements"]),
            oversample=int(hyper_doc["oversample"]),
            seed=int(hyper_doc["seed"]),
        )
        inputs = UncertainInput(tuple(
            UncertainParameter(
                name=str(p["name"]), lower=float(p["lower"]),
                upper=float(p["upper"]), kind=str(p["kind"]),
            )
            for p in document["inputs"]
        ))
        n_modes = int(document["n_modes"])
        ranks = [int(k) for k in document["temporal_ranks"]]
        temporal = TemporalModes(tuple(arrays[f"temporal_{mode}"] for mode in range(n_modes)))
        alpha = arrays["alpha"]
        modes = arrays["modes"]
        basis = PodBasis(
            modes=modes,
            singular_values=arrays["singular_values"],
            tolerance=hyper.eps_s,
            energy=float(document["pod"]["energy"]),
            n_rank=int(document["pod"]["n_rank"]),
            singular_values_all=arrays["singular_values_all"],
        )
        times = arrays["times"]
        n_snapshots = int(document["n_snapshots"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SurrogateFormatError(meta_file, f"incomplete metadata or payload ({exc})") from exc

    space = build_space(hyper.degrees, hyper.elements)
    if list(temporal.ranks) != ranks or alpha.shape != (space.n_global, sum(ranks)):
        raise SurrogateFormatError(
            meta_file, "coefficient block shapes disagree with the metadata"
        )
    if modes.shape[1] != n_modes or times.shape[0] != int(document["n_times"]):
        raise SurrogateFormatError(meta_file, "mode or time dimensions disagree with the metadata")

    splits = np.cumsum(ranks)[:-1]
    return Surrogate(
        basis=basis,
        temporal=temporal,
        coefficients=tuple(np.split(alpha, splits, axis=1)),
        space=space,
        inputs=inputs,
        times=times,
        hyperparameters=hyper,
        n_snapshots=n_snapshots,
        rank_deficient=bool(document.get("rank_deficient", False)),
        problem=str(document.get("problem", "external")),
        grid=GridSpec.from_dict(document["grid"]) if "grid" in document else None,
        config_hash=str(document.get("config_hash", "")),
    )

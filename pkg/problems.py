"""Built-in benchmark models and external snapshot-set ingestion.

Two analytical models are provided: the stochastic Ackley function (steady,
three inputs on [-1, 1]) and the exact solution of the viscous Burgers
equation with an uncertain Reynolds number. Snapshots computed by any other
solver enter through the snapshot file pair (see ``export.py`` for the byte
layout), which is validated here before it reaches the offline stage.

Node numbering is row-major over the grid axes with the first axis (x)
varying fastest, e.g. Ackley node ``iy * 160 + ix``.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import expit

from config import (
    ACKLEY_E,
    ACKLEY_EXTENT,
    ACKLEY_NODES,
    ACKLEY_PARAMETER_BOUNDS,
    ACKLEY_PARAMETERS,
    ACKLEY_PROFILE_X,
    BURGERS_DT,
    BURGERS_EXTENT,
    BURGERS_KDE_PROBES,
    BURGERS_NODES,
    BURGERS_PROFILE_TIMES,
    BURGERS_TIME_STEPS,
    SNAPSHOT_FORMAT_VERSION,
)
from exceptions import SnapshotFormatError
from export import metadata_path, read_file_pair, write_file_pair
from pod import SnapshotMatrix
from sampling import UncertainInput, UncertainParameter

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT_NAME = "pod-bsbem-snapshots"


@dataclass(frozen=True)
class GridSpec:
    """Uniform space grid plus the time instants of the snapshots.

    Attributes:
        extents: ``(low, high)`` per spatial axis, x first.
        counts: Node count per spatial axis.
        times: Snapshot time instants (``(0.0,)`` for steady problems).
    """

    extents: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]
    times: tuple[float, ...]

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.counts))

    @property
    def n_times(self) -> int:
        return len(self.times)

    @property
    def dimension(self) -> int:
        return len(self.counts)

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(low, high, count)
            for (low, high), count in zip(self.extents, self.counts)
        ]

    def coordinates(self) -> np.ndarray:
        """Node coordinates ``(n_nodes, dimension)`` in node order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([axis.ravel(order="F") for axis in mesh])

    def to_dict(self) -> dict[str, Any]:
        return {
            "extents": [list(extent) for extent in self.extents],
            "counts": list(self.counts),
            "times": list(self.times),
        }

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> "GridSpec":
        return cls(
            extents=tuple((float(lo), float(hi)) for lo, hi in document["extents"]),
            counts=tuple(int(n) for n in document["counts"]),
            times=tuple(float(t) for t in document["times"]),
        )


ACKLEY_GRID = GridSpec(
    extents=(ACKLEY_EXTENT, ACKLEY_EXTENT),
    counts=(ACKLEY_NODES, ACKLEY_NODES),
    times=(0.0,),
)

BURGERS_GRID = GridSpec(
    extents=(BURGERS_EXTENT,),
    counts=(BURGERS_NODES,),
    times=tuple(j * BURGERS_DT for j in range(1, BURGERS_TIME_STEPS + 1)),
)


def nearest_node(grid: GridSpec, point: tuple[float, ...]) -> int:
    """Index of the grid node closest to *point* (first one on ties)."""
    distances = np.linalg.norm(grid.coordinates() - np.asarray(point, dtype=float), axis=1)
    return int(np.argmin(distances))


def nearest_time(grid: GridSpec, t: float) -> int:
    return int(np.argmin(np.abs(np.array(grid.times) - t)))


@dataclass(frozen=True, eq=False)
class Problem:
    """A parametrized model ``eta -> field (n_nodes, n_times)``.

    Attributes:
        name: Problem id (``ackley``, ``burgers`` or ``external``).
        grid: Space-time grid of the fields.
        inputs: Uncertain inputs eta.
        evaluator: Field generator for one physical point.
        kde_probes: ``(node, time_index)`` locations whose output densities
            are reported.
        profile_nodes: Nodes of the reported cross section (all when None).
        profile_times: Time indices of the reported cross sections.
    """

    name: str
    grid: GridSpec
    inputs: UncertainInput
    evaluator: Callable[[np.ndarray], np.ndarray]
    kde_probes: tuple[tuple[int, int], ...] = ()
    profile_nodes: np.ndarray | None = None
    profile_times: tuple[int, ...] = (0,)

    @property
    def times(self) -> np.ndarray:
        return np.array(self.grid.times)

    def evaluate(self, eta: np.ndarray) -> np.ndarray:
        return self.evaluator(np.asarray(eta, dtype=float))


# ---------------------------------------------------------------------------
# Ackley
# ---------------------------------------------------------------------------


def ackley(x: np.ndarray | float, y: np.ndarray | float, xi: np.ndarray) -> np.ndarray | float:
    """Stochastic Ackley function at ``(x, y)`` for inputs xi in [-1, 1]^3."""
    a1 = 1.0 + 0.1 * xi[0]
    a2 = 1.0 + 0.1 * xi[1]
    a3 = 1.0 + 0.1 * xi[2]
    radial = np.exp(-0.2 * a2 * np.sqrt(0.5 * (np.square(x) + np.square(y))))
    oscillation = np.exp(0.5 * (np.cos(2.0 * np.pi * a1 * x) + np.cos(2.0 * np.pi * a1 * y)))
    return -20.0 * a3 * radial - oscillation + 20.0 + ACKLEY_E


def ackley_field(xi: np.ndarray, grid: GridSpec = ACKLEY_GRID) -> np.ndarray:
    """Ackley values over the grid nodes ``(n_nodes,)``."""
    coords = grid.coordinates()
    return ackley(coords[:, 0], coords[:, 1], np.asarray(xi, dtype=float))


def ackley_problem(grid: GridSpec = ACKLEY_GRID) -> Problem:
    """Steady Ackley problem; the reported cross section is the line x = 0."""
    low, high = ACKLEY_PARAMETER_BOUNDS
    inputs = UncertainInput(tuple(
        UncertainParameter(name=name, lower=low, upper=high)
        for name in ACKLEY_PARAMETERS
    ))
    coords = grid.coordinates()
    x_axis = grid.axes()[0]
    line_x = x_axis[np.argmin(np.abs(x_axis - ACKLEY_PROFILE_X))]
    return Problem(
        name="ackley",
        grid=grid,
        inputs=inputs,
        evaluator=lambda eta: ackley(coords[:, 0], coords[:, 1], eta)[:, None],
        profile_nodes=np.flatnonzero(coords[:, 0] == line_x),
        profile_times=(0,),
    )


# ---------------------------------------------------------------------------
# Burgers
# ---------------------------------------------------------------------------


def burgers_exact(x: np.ndarray | float, t: np.ndarray | float, re: float) -> np.ndarray | float:
    """Exact viscous Burgers solution u(x, t; Re).

    The denominator term sqrt((t+1)/t0) * exp(Re x^2 / (4t+4)) with
    t0 = exp(Re/8) is assembled in log space, so no intermediate overflows
    for large Re.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    log_term = 0.5 * np.log1p(t) - re / 16.0 + re * np.square(x) / (4.0 * t + 4.0)
    return x / (t + 1.0) * expit(-log_term)


def burgers_field(re: float, grid: GridSpec = BURGERS_GRID) -> np.ndarray:
    """Burgers solution on the grid ``(n_nodes, n_times)``.

    Raises:
        ValueError: If *re* is not positive.
    """
    if not re > 0.0:
        raise ValueError(f"Reynolds number must be positive, got {re}")
    x = grid.axes()[0][:, None]
    t = np.array(grid.times)[None, :]
    return burgers_exact(x, t, re)


def burgers_problem(lower: float, upper: float, grid: GridSpec = BURGERS_GRID) -> Problem:
    """Burgers problem with Re uniform on [lower, upper]."""
    inputs = UncertainInput((UncertainParameter(name="Re", lower=lower, upper=upper),))
    return Problem(
        name="burgers",
        grid=grid,
        inputs=inputs,
        evaluator=lambda eta: burgers_field(float(eta[0]), grid),
        kde_probes=tuple(
            (nearest_node(grid, (x,)), nearest_time(grid, t)) for x, t in BURGERS_KDE_PROBES
        ),
        profile_times=tuple(nearest_time(grid, t) for t in BURGERS_PROFILE_TIMES),
    )


# ---------------------------------------------------------------------------
# External snapshot sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExternalSnapshotSet:
    """A validated snapshot file pair.

    Attributes:
        path: The metadata file.
        snapshots: Snapshot matrix in sample-major order.
        parameters: Physical parameter table ``(n_samples, m)``.
        parameter_names: Column names of the parameter table.
        times: Time grid ``(n_times,)``.
        grid: Spatial grid, when the producer declared one.
    """

    path: Path
    snapshots: SnapshotMatrix
    parameters: np.ndarray
    parameter_names: tuple[str, ...]
    times: np.ndarray
    grid: GridSpec | None


def export_snapshots(
    stem: Path | str,
    snapshots: SnapshotMatrix,
    parameters: np.ndarray,
    parameter_names: list[str] | tuple[str, ...],
    times: np.ndarray,
    grid: GridSpec | None = None,
) -> Path:
    """Write a snapshot set as a metadata sidecar plus raw payload.

    Returns:
        The metadata path.
    """
    parameters = np.atleast_2d(np.asarray(parameters, dtype=float))
    metadata: dict[str, Any] = {
        "format": SNAPSHOT_FORMAT_NAME,
        "version": SNAPSHOT_FORMAT_VERSION,
        "ordering": snapshots.ordering,
        "n_nodes": snapshots.n_nodes,
        "n_samples": snapshots.n_samples,
        "n_times": snapshots.n_times,
        "parameter_names": list(parameter_names),
        "parameters": parameters,
        "times": np.asarray(times, dtype=float),
    }
    if grid is not None:
        metadata["grid"] = grid.to_dict()
    meta_file, _ = write_file_pair(stem, metadata, {"snapshots": snapshots.values})
    logger.info(
        "Exported %d snapshots (%d nodes x %d times) to %s",
        snapshots.n_samples, snapshots.n_nodes, snapshots.n_times, meta_file,
    )
    return meta_file


def _require(document: dict[str, Any], key: str, meta_file: Path) -> Any:
    if key not in document:
        raise SnapshotFormatError(meta_file, f"missing metadata key '{key}'")
    return document[key]


def ingest_snapshots(stem: Path | str) -> ExternalSnapshotSet:
    """Read and validate an externally produced snapshot set.

    Args:
        stem: Path of the pair without suffix (``<stem>.yaml`` +
            ``<stem>.bin``).

    Returns:
        The validated ``ExternalSnapshotSet``.

    Raises:
        SnapshotFormatError: On missing metadata, a version or ordering
            mismatch, a payload byte count that differs from the declared
            dimensions, or a non-finite value (reported by node and column).
    """
    meta_file = metadata_path(stem)
    document, arrays = read_file_pair(stem, SnapshotFormatError)

    if document.get("format") != SNAPSHOT_FORMAT_NAME:
        raise SnapshotFormatError(meta_file, f"format must be '{SNAPSHOT_FORMAT_NAME}'")
    version = _require(document, "version", meta_file)
    if version != SNAPSHOT_FORMAT_VERSION:
        raise SnapshotFormatError(
            meta_file, f"version {version} unsupported, expected {SNAPSHOT_FORMAT_VERSION}"
        )
    if _require(document, "ordering", meta_file) != "sample-major":
        raise SnapshotFormatError(meta_file, "only 'sample-major' ordering is supported")

    n_nodes = int(_require(document, "n_nodes", meta_file))
    n_samples = int(_require(document, "n_samples", meta_file))
    n_times = int(_require(document, "n_times", meta_file))
    names = tuple(str(n) for n in _require(document, "parameter_names", meta_file))
    parameters = np.asarray(_require(document, "parameters", meta_file), dtype=float)
    times = np.asarray(_require(document, "times", meta_file), dtype=float)

    if "snapshots" not in arrays:
        raise SnapshotFormatError(meta_file, "payload table lacks the 'snapshots' array")
    values = arrays["snapshots"]
    expected_bytes = n_nodes * n_samples * n_times * 8
    if values.shape != (n_nodes, n_samples * n_times):
        raise SnapshotFormatError(
            meta_file,
            f"declared dimensions need {expected_bytes} bytes "
            f"({n_nodes} x {n_samples * n_times}), payload holds {values.size * 8} bytes",
        )
    if parameters.shape != (n_samples, len(names)):
        raise SnapshotFormatError(
            meta_file,
            f"parameter table shape {parameters.shape} != ({n_samples}, {len(names)})",
        )
    if times.shape != (n_times,):
        raise SnapshotFormatError(
            meta_file, f"time grid has {times.size} entries, expected {n_times}"
        )

    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        node, column = (int(i) for i in bad[0])
        raise SnapshotFormatError(
            meta_file,
            f"non-finite value {values[node, column]} at node {node}, column {column} "
            f"({len(bad)} non-finite entries in total)",
        )

    grid = GridSpec.from_dict(document["grid"]) if "grid" in document else None
    if grid is not None and (grid.n_nodes != n_nodes or grid.n_times != n_times):
        raise SnapshotFormatError(meta_file, "declared grid does not match the dimensions")

    logger.info(
        "Ingested %d snapshots (%d nodes x %d times) from %s",
        n_samples, n_nodes, n_times, meta_file,
    )
    return ExternalSnapshotSet(
        path=meta_file,
        snapshots=SnapshotMatrix(values=values, n_samples=n_samples, n_times=n_times),
        parameters=parameters,
        parameter_names=names,
        times=times,
        grid=grid,
    )

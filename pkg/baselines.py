"""Full-order PCE baseline and brute-force reference statistics."""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre

from config import REFERENCE_CHUNK_SIZE
from exceptions import NumericalError
from rom import Model, StatisticsField
from sampling import UncertainInput, lhs_sample, mc_sample

logger = logging.getLogger(__name__)


def total_degree_indices(m: int, order: int) -> np.ndarray:
    """Multi-indices ``(M_pce, m)`` with total degree <= *order*.

    Ordered by total degree; within one degree the first dimension's
    exponent decreases, so the constant term comes first and the linear
    terms follow in dimension order.
    """
    if m < 1 or order < 0:
        raise ValueError(f"Need m >= 1 and order >= 0, got m={m}, order={order}")
    indices = [
        combo for combo in itertools.product(range(order + 1), repeat=m) if sum(combo) <= order
    ]
    indices.sort(key=lambda combo: (sum(combo), tuple(-d for d in combo)))
    return np.array(indices, dtype=np.int64)


def legendre_design(indices: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Product-Legendre values ``(n, M_pce)`` at points ``(n, m)`` in [-1, 1]^m."""
    zeta = np.atleast_2d(zeta)
    order = int(indices.max()) if indices.size else 0
    design = np.ones((zeta.shape[0], indices.shape[0]))
    for d in range(zeta.shape[1]):
        vander = legendre.legvander(zeta[:, d], order)
        design *= vander[:, indices[:, d]]
    return design


@dataclass(frozen=True, eq=False)
class PceExpansion:
    """Legendre PCE of every (node, time) output.

    Attributes:
        order: Total polynomial degree p.
        oversampling: Ratio n_p of regression points to basis size.
        indices: Multi-index set ``(M_pce, m)``.
        coefficients: ``(M_pce, n_nodes, n_times)``.
        inputs: Uncertain inputs.
        seed: Seed of the LHS regression points.
    """

    order: int
    oversampling: int
    indices: np.ndarray
    coefficients: np.ndarray
    inputs: UncertainInput
    seed: int

    @property
    def n_terms(self) -> int:
        return self.indices.shape[0]

    @property
    def n_samples(self) -> int:
        return self.oversampling * self.n_terms


def pce_fit(
    model: Model,
    inputs: UncertainInput,
    order: int,
    oversampling: int,
    seed: int,
    threads: int = 1,
) -> PceExpansion:
    """Fit a total-degree Legendre PCE by least-squares regression.

    ``oversampling * M_pce`` LHS points are mapped to [-1, 1]^m; all node and
    time outputs share one design matrix and are solved together.

    Raises:
        ValueError: If *order* < 0 or *oversampling* < 1.
        NumericalError: If the regression design is rank-deficient.
    """
    if order < 0 or oversampling < 1:
        raise ValueError(
            f"PCE needs order >= 0 and oversampling >= 1, got {order} and {oversampling}"
        )
    indices = total_degree_indices(inputs.m, order)
    n_samples = oversampling * indices.shape[0]
    samples = lhs_sample(inputs.m, n_samples, seed, inputs)
    design = legendre_design(indices, 2.0 * samples.unit_points - 1.0)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        fields = list(pool.map(model, samples.physical_points))
    shape = fields[0].shape
    outputs = np.stack([f.reshape(-1) for f in fields])

    coefficients, _, rank, _ = scipy.linalg.lstsq(design, outputs, lapack_driver="gelsd")
    if rank < indices.shape[0]:
        raise NumericalError(
            "pce_fit",
            f"design of {n_samples} points has rank {rank} < {indices.shape[0]} terms; "
            f"increase the oversampling ratio",
        )
    logger.info(
        "PCE fitted: order %d, %d terms, %d model runs", order, indices.shape[0], n_samples
    )
    return PceExpansion(
        order=order,
        oversampling=oversampling,
        indices=indices,
        coefficients=coefficients.reshape(indices.shape[0], *shape),
        inputs=inputs,
        seed=seed,
    )


def pce_evaluate(
    expansion: PceExpansion,
    unit_points: np.ndarray,
    probe: tuple[int, int] | None = None,
) -> np.ndarray:
    """Evaluate the expansion at unit points ``(n, m)``.

    Returns:
        Fields ``(n, n_nodes, n_times)``, or ``(n,)`` values at *probe*
        ``(node, time_index)``.
    """
    design = legendre_design(expansion.indices, 2.0 * np.atleast_2d(unit_points) - 1.0)
    if probe is not None:
        node, time_index = probe
        return design @ expansion.coefficients[:, node, time_index]
    return np.einsum("nk,kxt->nxt", design, expansion.coefficients)


def pce_statistics(expansion: PceExpansion) -> StatisticsField:
    """Mean and std from the coefficients: orthogonality gives them exactly."""
    norms = np.prod(1.0 / (2.0 * expansion.indices + 1.0), axis=1)
    coefficients = expansion.coefficients
    mean = coefficients[0].copy()
    variance = np.einsum("k,kxt->xt", norms[1:], coefficients[1:] ** 2)
    return StatisticsField(mean=mean, std=np.sqrt(variance))


# ---------------------------------------------------------------------------
# Reference statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceStatistics:
    """Sample mean and population standard deviation of the model output."""

    mean: np.ndarray
    std: np.ndarray
    n_samples: int
    scheme: str
    seed: int
    probe_values: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))


def _chunk_moments(
    model: Model,
    points: np.ndarray,
    probes: tuple[tuple[int, int], ...],
) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Welford accumulation over one chunk: (count, mean, M2, probe values)."""
    mean = None
    m2 = None
    recorded = np.empty((points.shape[0], len(probes)))
    for i, eta in enumerate(points):
        values = model(eta)
        if mean is None:
            mean = np.zeros_like(values, dtype=float)
            m2 = np.zeros_like(values, dtype=float)
        delta = values - mean
        mean += delta / (i + 1)
        m2 += delta * (values - mean)
        for j, (node, time_index) in enumerate(probes):
            recorded[i, j] = values[node, time_index]
    return points.shape[0], mean, m2, recorded


def reference_statistics(
    model: Model,
    inputs: UncertainInput,
    n: int,
    scheme: str,
    seed: int,
    probes: tuple[tuple[int, int], ...] = (),
    threads: int = 1,
) -> ReferenceStatistics:
    """Brute-force statistics over *n* MC or LHS model runs.

    Chunks of fixed size are accumulated independently and merged in chunk
    order, so the result does not depend on *threads*.

    Args:
        model: Field generator for one physical point.
        inputs: Uncertain inputs to sample.
        n: Sample count (>= 2).
        scheme: ``"mc"`` or ``"lhs"``.
        seed: Sampling seed.
        probes: ``(node, time_index)`` locations whose raw values are kept.
        threads: Worker count.

    Raises:
        ValueError: If n < 2 or the scheme is unknown.
    """
    if n < 2:
        raise ValueError(f"Reference statistics need n >= 2, got {n}")
    samplers = {"mc": mc_sample, "lhs": lhs_sample}
    if scheme not in samplers:
        raise ValueError(f"Unknown sampling scheme '{scheme}', expected one of {list(samplers)}")
    points = samplers[scheme](inputs.m, n, seed, inputs).physical_points
    chunks = [points[i:i + REFERENCE_CHUNK_SIZE] for i in range(0, n, REFERENCE_CHUNK_SIZE)]

    count = 0
    mean: np.ndarray | None = None
    m2: np.ndarray | None = None
    recorded = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for chunk_count, chunk_mean, chunk_m2, chunk_probes in pool.map(
            lambda chunk: _chunk_moments(model, chunk, probes), chunks
        ):
            recorded.append(chunk_probes)
            if mean is None:
                count, mean, m2 = chunk_count, chunk_mean, chunk_m2
                continue
            total = count + chunk_count
            delta = chunk_mean - mean
            mean = mean + delta * (chunk_count / total)
            m2 = m2 + chunk_m2 + delta ** 2 * (count * chunk_count / total)
            count = total

    logger.info("Reference statistics from %d %s samples (seed=%d)", n, scheme, seed)
    return ReferenceStatistics(
        mean=mean,
        std=np.sqrt(np.clip(m2 / count, 0.0, None)),
        n_samples=n,
        scheme=scheme,
        seed=seed,
        probe_values=np.vstack(recorded),
    )

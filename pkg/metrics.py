"""Relative L2 error norms and kernel density estimates."""

import logging
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np
from scipy import stats

from config import IQR_NORMAL_SCALE, SILVERMAN_FACTOR
from exceptions import NumericalError

logger = logging.getLogger(__name__)


class Moments(Protocol):
    mean: np.ndarray
    std: np.ndarray


def l2_relative_error(candidate: np.ndarray, reference: np.ndarray) -> float:
    """sqrt(sum (c - r)^2 / sum r^2).

    Raises:
        ValueError: If the shapes differ.
        NumericalError: If *reference* is all-zero.
    """
    candidate = np.asarray(candidate, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if candidate.shape != reference.shape:
        raise ValueError(f"Shape mismatch: {candidate.shape} vs {reference.shape}")
    denominator = np.sum(reference ** 2)
    if denominator == 0.0:
        raise NumericalError("l2_relative_error", "reference field has zero norm")
    return float(np.sqrt(np.sum((candidate - reference) ** 2) / denominator))


def max_l2_over_time(candidate: np.ndarray, reference: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-time relative errors of ``(n_nodes, n_times)`` fields and their maximum.

    Raises:
        ValueError: If the shapes differ.
        NumericalError: If a reference column has zero norm.
    """
    candidate = np.asarray(candidate, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if candidate.shape != reference.shape or candidate.ndim != 2:
        raise ValueError(f"Need matching 2-D fields, got {candidate.shape} vs {reference.shape}")
    norms = np.sum(reference ** 2, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise NumericalError(
            "max_l2_over_time", f"reference column {int(zero[0])} has zero norm"
        )
    series = np.sqrt(np.sum((candidate - reference) ** 2, axis=0) / norms)
    return series, float(np.max(series))


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Silverman's rule h = 0.9 min(sigma, IQR / 1.34) n^(-1/5).

    The IQR term is skipped when it is zero.

    Raises:
        NumericalError: For fewer than two samples or zero spread.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2 or not np.all(np.isfinite(samples)):
        raise NumericalError("kde", f"need >= 2 finite samples, got {samples.size}")
    sigma = float(np.std(samples, ddof=1))
    if sigma == 0.0:
        raise NumericalError("kde", "samples have zero variance")
    spread = float(stats.iqr(samples)) / IQR_NORMAL_SCALE
    scale = min(sigma, spread) if spread > 0.0 else sigma
    return SILVERMAN_FACTOR * scale * samples.size ** (-0.2)


def gaussian_kde(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian KDE with Silverman's bandwidth evaluated on *grid*.

    Raises:
        NumericalError: For degenerate samples.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    bandwidth = silverman_bandwidth(samples)
    kde = stats.gaussian_kde(samples, bw_method=bandwidth / np.std(samples, ddof=1))
    return kde(np.asarray(grid, dtype=float))


def kde_grid(samples: np.ndarray, n_points: int) -> np.ndarray:
    """Grid spanning the sample range widened by 4 bandwidths on each side."""
    bandwidth = silverman_bandwidth(samples)
    return np.linspace(
        np.min(samples) - 4.0 * bandwidth, np.max(samples) + 4.0 * bandwidth, n_points
    )


@dataclass(frozen=True, eq=False)
class ErrorReport:
    """Relative errors of a candidate's mean and std against a reference."""

    method: str
    times: np.ndarray
    mean_errors: np.ndarray
    std_errors: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def mean_max(self) -> float:
        return float(np.max(self.mean_errors))

    @property
    def std_max(self) -> float:
        return float(np.max(self.std_errors))


def error_report(
    method: str,
    candidate: Moments,
    reference: Moments,
    times: np.ndarray,
    metadata: dict[str, Any] | None = None,
) -> ErrorReport:
    """Compare mean and std fields time instant by time instant."""
    mean_errors, _ = max_l2_over_time(candidate.mean, reference.mean)
    std_errors, _ = max_l2_over_time(candidate.std, reference.std)
    report = ErrorReport(
        method=method,
        times=np.asarray(times, dtype=float),
        mean_errors=mean_errors,
        std_errors=std_errors,
        metadata=dict(metadata or {}),
    )
    logger.info(
        "%s: max mean error %.4e, max std error %.4e", method, report.mean_max, report.std_max
    )
    return report

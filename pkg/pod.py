"""Proper orthogonal decomposition: truncated SVD, two-step and third-level POD.

Every basis returned here is orthonormal, truncated by the cumulative-energy
criterion and sign-fixed (largest-magnitude entry of each mode positive), so
repeated runs produce bit-identical modes.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from config import SINGULAR_VALUE_FLOOR
from exceptions import NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """Global snapshot matrix in sample-major column order.

    Column ``s * n_times + j`` holds the field of sample s at time t_j, so
    block s is the time-trajectory matrix of sample s.
    """

    values: np.ndarray
    n_samples: int
    n_times: int
    ordering: str = "sample-major"

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError(f"Snapshot values must be 2-D, got {self.values.ndim}-D")
        if self.values.shape[1] != self.n_samples * self.n_times:
            raise ValueError(
                f"Snapshot matrix has {self.values.shape[1]} columns, expected "
                f"n_samples * n_times = {self.n_samples * self.n_times}"
            )

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    def block(self, s: int) -> np.ndarray:
        """Time-trajectory matrix U_s ``(n_nodes, n_times)`` of sample *s*."""
        if not 0 <= s < self.n_samples:
            raise IndexError(f"Sample index {s} out of range [0, {self.n_samples})")
        return self.values[:, s * self.n_times:(s + 1) * self.n_times]

    @classmethod
    def from_fields(cls, fields: list[np.ndarray]) -> "SnapshotMatrix":
        """Stack per-sample fields ``(n_nodes, n_times)`` in sample order."""
        if not fields:
            raise ValueError("At least one field is required")
        n_times = fields[0].shape[1]
        return cls(
            values=np.hstack(fields),
            n_samples=len(fields),
            n_times=n_times,
        )


@dataclass(frozen=True, eq=False)
class PodBasis:
    """Truncated POD basis.

    Attributes:
        modes: Orthonormal modes ``(n_rows, L)``.
        singular_values: Retained singular values, descending ``(L,)``.
        tolerance: Energy tolerance epsilon used for the truncation.
        energy: Captured-energy ratio of the L retained modes.
        n_rank: N_r, the numerical rank before truncation.
        singular_values_all: The N_r singular values above the floor.
    """

    modes: np.ndarray
    singular_values: np.ndarray
    tolerance: float
    energy: float
    n_rank: int
    singular_values_all: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.modes.shape[1]


@dataclass(frozen=True, eq=False)
class TemporalModes:
    """Per spatial mode l, the temporal basis X^l ``(n_times, K_l)``."""

    modes: tuple[np.ndarray, ...]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(x.shape[1] for x in self.modes)


def fix_signs(modes: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    peaks = np.argmax(np.abs(modes), axis=0)
    signs = np.sign(modes[peaks, np.arange(modes.shape[1])])
    signs[signs == 0] = 1.0
    return modes * signs


def truncation_rank(singular_values: np.ndarray, eps: float) -> int:
    """Smallest L whose cumulative energy ratio strictly exceeds 1 - eps."""
    energies = np.cumsum(singular_values ** 2)
    ratios = energies / energies[-1]
    return int(np.argmax(ratios > 1.0 - eps)) + 1


def _left_singular_pairs(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = matrix.shape
    if cols <= rows:
        try:
            u, s, _ = scipy.linalg.svd(matrix, full_matrices=False, lapack_driver="gesdd")
        except np.linalg.LinAlgError:
            logger.warning(
                "gesdd did not converge on %dx%d matrix, retrying with gesvd", rows, cols
            )
            u, s, _ = scipy.linalg.svd(matrix, full_matrices=False, lapack_driver="gesvd")
        return u, s
    # Wide matrix: eigen-decompose the smaller (rows x rows) correlation matrix.
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix @ matrix.T)
    order = np.argsort(-eigenvalues, kind="stable")
    s = np.sqrt(np.clip(eigenvalues[order], 0.0, None))
    return eigenvectors[:, order], s


def pod(matrix: np.ndarray, eps: float) -> PodBasis:
    """POD of *matrix* truncated by the energy tolerance *eps*.

    Args:
        matrix: Real 2-D array whose column space is compressed.
        eps: Energy tolerance in (0, 1).

    Returns:
        The sign-fixed ``PodBasis``.

    Raises:
        ValueError: If *eps* is outside (0, 1).
        NumericalError: If *matrix* is all-zero or holds non-finite values.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"Energy tolerance must lie in (0, 1), got {eps}")
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError(f"POD needs a 2-D matrix, got {matrix.ndim}-D")
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("pod", "matrix holds non-finite values")
    if not np.any(matrix):
        raise NumericalError("pod", f"{matrix.shape[0]}x{matrix.shape[1]} matrix is all-zero")

    u, s = _left_singular_pairs(matrix)
    n_rank = int(np.count_nonzero(s > SINGULAR_VALUE_FLOOR * s[0]))
    spectrum = s[:n_rank]
    n_modes = truncation_rank(spectrum, eps)
    energies = np.cumsum(spectrum ** 2)
    basis = PodBasis(
        modes=fix_signs(u[:, :n_modes]),
        singular_values=spectrum[:n_modes].copy(),
        tolerance=eps,
        energy=float(energies[n_modes - 1] / energies[-1]),
        n_rank=n_rank,
        singular_values_all=spectrum.copy(),
    )
    logger.debug(
        "POD of %dx%d matrix: N_r=%d, L=%d (eps=%.1e)",
        matrix.shape[0], matrix.shape[1], n_rank, n_modes, eps,
    )
    return basis


def two_step_pod(
    snapshots: SnapshotMatrix,
    eps_t: float,
    eps_s: float,
    threads: int = 1,
) -> PodBasis:
    """Two-step POD: compress each trajectory, then POD the stacked bases.

    Step 1 reduces every block U_s to its modes T_s = POD(U_s, eps_t); step 2
    returns POD([T_1 | ... | T_Ns], eps_s). Blocks are concatenated in sample
    order whatever order the workers finish in.

    Raises:
        NumericalError: Propagated from ``pod``.
    """
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(
            lambda s: pod(snapshots.block(s), eps_t).modes,
            range(snapshots.n_samples),
        ))
    compressed = np.hstack(blocks)
    logger.info(
        "Two-step POD step 1: %d trajectories compressed to %d columns",
        snapshots.n_samples, compressed.shape[1],
    )
    basis = pod(compressed, eps_s)
    logger.info(
        "Two-step POD step 2: L=%d spatial modes (energy %.12f)",
        basis.n_modes, basis.energy,
    )
    return basis


def project_coefficients(basis: PodBasis, snapshots: SnapshotMatrix) -> np.ndarray:
    """Projection coefficients B = Phi^T U ``(L, n_samples * n_times)``.

    Raises:
        ValueError: If the node counts disagree.
    """
    if basis.modes.shape[0] != snapshots.n_nodes:
        raise ValueError(
            f"Basis has {basis.modes.shape[0]} rows but snapshots have "
            f"{snapshots.n_nodes} nodes"
        )
    return basis.modes.T @ snapshots.values


def reshape_mode_row(
    coefficients: np.ndarray,
    mode: int,
    n_times: int,
    n_samples: int,
) -> np.ndarray:
    """Row *mode* of B as the matrix beta^l ``(n_times, n_samples)``.

    ``beta[j, s] = B[mode, s * n_times + j]``.

    Raises:
        IndexError: If *mode* is out of range.
        ValueError: If the row length is not n_times * n_samples.
    """
    if not 0 <= mode < coefficients.shape[0]:
        raise IndexError(f"Mode index {mode} out of range [0, {coefficients.shape[0]})")
    row = coefficients[mode]
    if row.shape[0] != n_times * n_samples:
        raise ValueError(
            f"Row length {row.shape[0]} != n_times * n_samples = {n_times * n_samples}"
        )
    return np.ascontiguousarray(row.reshape(n_samples, n_times).T)


def flatten_mode_matrix(beta: np.ndarray) -> np.ndarray:
    """Inverse of ``reshape_mode_row``: sample-major row vector."""
    return np.ascontiguousarray(beta.T).ravel()


def third_level_pod(beta: np.ndarray, eps_s: float) -> tuple[np.ndarray, np.ndarray]:
    """Split beta^l into temporal modes X^l and coefficients Lambda^l.

    Returns:
        ``(X, Lambda)`` with ``X = POD(beta, eps_s).modes`` ``(n_times, K)``
        and ``Lambda = X^T beta`` ``(K, n_samples)``.

    Raises:
        NumericalError: Propagated from ``pod``.
    """
    temporal = pod(beta, eps_s).modes
    return temporal, temporal.T @ beta

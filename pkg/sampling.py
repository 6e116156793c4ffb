"""Input-uncertainty description, CDF mappings and sample generation.

Physical inputs eta live in their own supports; every sampling scheme works
on the unit cube [0, 1]^m and maps coordinate-wise through the inverse
marginal CDFs. All functions are pure given their seed.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from scipy import stats
from scipy.stats import qmc

from config import RNG_ALGORITHM
from splines import BSplineSpace, element_quadrature

logger = logging.getLogger(__name__)

Scheme = Literal["lhs", "mc", "element-collocation"]

# Kind tag -> frozen scipy.stats distribution factory.
DISTRIBUTION_KINDS = {
    "uniform": lambda lower, upper: stats.uniform(loc=lower, scale=upper - lower),
}


@dataclass(frozen=True)
class UncertainParameter:
    """One independent uncertain input."""

    name: str
    lower: float
    upper: float
    kind: str = "uniform"

    def __post_init__(self) -> None:
        if self.kind not in DISTRIBUTION_KINDS:
            raise ValueError(
                f"Unsupported distribution kind '{self.kind}' for '{self.name}'. "
                f"Supported: {', '.join(DISTRIBUTION_KINDS)}"
            )
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"Bounds of '{self.name}' must be finite")
        if not self.lower < self.upper:
            raise ValueError(
                f"Parameter '{self.name}' needs lower < upper, "
                f"got [{self.lower}, {self.upper}]"
            )

    def distribution(self) -> Any:
        """Frozen scipy.stats marginal selected by the kind tag."""
        return DISTRIBUTION_KINDS[self.kind](self.lower, self.upper)


@dataclass(frozen=True)
class UncertainInput:
    """Mutually independent uncertain inputs; the joint density is the product."""

    parameters: tuple[UncertainParameter, ...]

    @property
    def m(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> list[str]:
        return [param.name for param in self.parameters]


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Unit points ``(n, m)`` with their physical images ``(n, m)``.

    Attributes:
        unit_points: Points in [0, 1]^m.
        physical_points: Coordinate-wise inverse-CDF images of the unit points.
        seed: Seed that produced the set (``None`` for deterministic grids).
        scheme: ``"lhs"``, ``"mc"`` or ``"element-collocation"``.
        rng: Name of the bit generator behind the seed.
    """

    unit_points: np.ndarray
    physical_points: np.ndarray
    seed: int | None
    scheme: Scheme
    rng: str = RNG_ALGORITHM

    def __len__(self) -> int:
        return self.unit_points.shape[0]


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator on the configured bit generator."""
    return np.random.Generator(getattr(np.random, RNG_ALGORITHM)(seed))


def _parameter(inputs: UncertainInput, param_index: int) -> UncertainParameter:
    if not 0 <= param_index < inputs.m:
        raise IndexError(
            f"Parameter index {param_index} out of range [0, {inputs.m})"
        )
    return inputs.parameters[param_index]


# ---------------------------------------------------------------------------
# CDF mappings
# ---------------------------------------------------------------------------


def cdf(inputs: UncertainInput, param_index: int, eta: float) -> float:
    """Marginal CDF F_i(eta), clamped to [0, 1].

    Raises:
        IndexError: If *param_index* is out of range.
    """
    return float(np.clip(_parameter(inputs, param_index).distribution().cdf(eta), 0.0, 1.0))


def inverse_cdf(inputs: UncertainInput, param_index: int, xi: float) -> float:
    """Marginal inverse CDF F_i^{-1}(xi).

    Raises:
        IndexError: If *param_index* is out of range.
        ValueError: If *xi* is outside [0, 1].
    """
    param = _parameter(inputs, param_index)
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    return float(param.distribution().ppf(xi))


def to_physical(inputs: UncertainInput, unit_points: np.ndarray) -> np.ndarray:
    """Map unit points ``(n, m)`` to physical points coordinate-wise.

    Raises:
        ValueError: If a coordinate is outside [0, 1] or the width is wrong.
    """
    unit_points = np.atleast_2d(np.asarray(unit_points, dtype=float))
    if unit_points.shape[1] != inputs.m:
        raise ValueError(
            f"Expected {inputs.m} coordinates per point, got {unit_points.shape[1]}"
        )
    if np.any(unit_points < 0.0) or np.any(unit_points > 1.0):
        raise ValueError("Unit points must lie in [0, 1]^m")
    return np.column_stack([
        param.distribution().ppf(unit_points[:, i])
        for i, param in enumerate(inputs.parameters)
    ])


def to_unit(inputs: UncertainInput, physical_points: np.ndarray) -> np.ndarray:
    """Map physical points ``(n, m)`` into [0, 1]^m.

    Raises:
        ValueError: If a point lies outside the support of its marginal.
    """
    physical_points = np.atleast_2d(np.asarray(physical_points, dtype=float))
    if physical_points.shape[1] != inputs.m:
        raise ValueError(
            f"Expected {inputs.m} coordinates per point, got {physical_points.shape[1]}"
        )
    for i, param in enumerate(inputs.parameters):
        column = physical_points[:, i]
        if np.any(column < param.lower) or np.any(column > param.upper):
            raise ValueError(
                f"Values of '{param.name}' must lie in its support "
                f"[{param.lower}, {param.upper}]"
            )
    return np.column_stack([
        np.clip(param.distribution().cdf(physical_points[:, i]), 0.0, 1.0)
        for i, param in enumerate(inputs.parameters)
    ])


def bounds_from_moments(mean: float, cv: float) -> tuple[float, float]:
    """Uniform support with mean *mean* and standard deviation ``mean * cv``.

    Raises:
        ValueError: If *mean* or *cv* is not positive.
    """
    if not mean > 0.0 or not cv > 0.0:
        raise ValueError(
            f"mean and cv must be positive, got mean={mean}, cv={cv}"
        )
    half_width = math.sqrt(3.0) * mean * cv
    return mean - half_width, mean + half_width


# ---------------------------------------------------------------------------
# Sample generation
# ---------------------------------------------------------------------------


def _sample_set(
    unit_points: np.ndarray,
    seed: int | None,
    scheme: Scheme,
    inputs: UncertainInput | None,
) -> SampleSet:
    physical = unit_points.copy() if inputs is None else to_physical(inputs, unit_points)
    return SampleSet(
        unit_points=unit_points,
        physical_points=physical,
        seed=seed,
        scheme=scheme,
    )


def lhs_sample(
    m: int,
    n: int,
    seed: int,
    inputs: UncertainInput | None = None,
) -> SampleSet:
    """Latin hypercube sample of *n* points in [0, 1]^m.

    Each point sits uniformly at random inside its stratum; per-dimension
    stratum orders are independent permutations. Without *inputs* the
    physical points equal the unit points.

    Raises:
        ValueError: If *n* < 1.
    """
    if n < 1:
        raise ValueError(f"Sample size must be >= 1, got {n}")
    engine = qmc.LatinHypercube(d=m, scramble=True, seed=make_rng(seed))
    unit_points = engine.random(n)
    logger.debug("Drew %d LHS points in %d dimensions (seed=%d)", n, m, seed)
    return _sample_set(unit_points, seed, "lhs", inputs)


def mc_sample(
    m: int,
    n: int,
    seed: int,
    inputs: UncertainInput | None = None,
) -> SampleSet:
    """Independent uniform points on [0, 1]^m.

    Raises:
        ValueError: If *n* < 1.
    """
    if n < 1:
        raise ValueError(f"Sample size must be >= 1, got {n}")
    unit_points = make_rng(seed).random((n, m))
    logger.debug("Drew %d MC points in %d dimensions (seed=%d)", n, m, seed)
    return _sample_set(unit_points, seed, "mc", inputs)


def element_collocation_points(
    space: BSplineSpace,
    element_index: int,
    oversample: int = 1,
    inputs: UncertainInput | None = None,
) -> SampleSet:
    """Gauss–Legendre collocation grid strictly inside one element.

    ``oversample * (p_i + 1)`` abscissae per dimension, so the default gives
    exactly n_b points per element.

    Raises:
        IndexError: If *element_index* is invalid.
        ValueError: If *oversample* < 1.
    """
    if oversample < 1:
        raise ValueError(f"oversample must be >= 1, got {oversample}")
    counts = [oversample * (p + 1) for p in space.degrees]
    rule = element_quadrature(space, element_index, counts)
    return _sample_set(rule.nodes, None, "element-collocation", inputs)

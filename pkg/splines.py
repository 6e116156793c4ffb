"""Tensor-product B-spline spaces over Bézier-element partitions of [0, 1]^m.

Provides the open uniform knot vectors, the element connectivity (IEN) table,
element-local basis evaluation by the Cox–de Boor recursion and tensor
Gauss–Legendre element quadrature. Every multi-index in this module is
flattened lexicographically with dimension 1 varying fastest; coefficient
files depend on that order, so it never changes.
"""

import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np

from config import ELEMENT_TOLERANCE

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BSplineSpace:
    """An immutable tensor-product B-spline space on [0, 1]^m.

    Attributes:
        degrees: Polynomial degree p_i per dimension.
        elements: Element count nx_i per dimension.
        knots: Open uniform knot vector per dimension.
        ien_table: ``(n_elements, n_local)`` local-to-global index map.
    """

    degrees: tuple[int, ...]
    elements: tuple[int, ...]
    knots: tuple[np.ndarray, ...]
    ien_table: np.ndarray

    @property
    def m(self) -> int:
        return len(self.degrees)

    @property
    def n_functions(self) -> tuple[int, ...]:
        """Global univariate function counts M_i = nx_i + p_i."""
        return tuple(nx + p for nx, p in zip(self.elements, self.degrees))

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.elements))

    @property
    def n_local(self) -> int:
        """Number n_b of basis functions supported on one element."""
        return int(np.prod([p + 1 for p in self.degrees]))

    @property
    def n_global(self) -> int:
        """Total global coefficient count M."""
        return int(np.prod(self.n_functions))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Tensor Gauss–Legendre nodes ``(n, m)`` and positive weights ``(n,)``."""

    nodes: np.ndarray
    weights: np.ndarray


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _tensor_grid(axes: list[np.ndarray]) -> np.ndarray:
    """Return the tensor grid of *axes* as ``(n, m)`` rows, dimension 1 fastest."""
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([grid.ravel(order="F") for grid in mesh])


def _tensor_values(per_dim: list[np.ndarray]) -> np.ndarray:
    """Combine per-dimension value blocks ``(n, k_i)`` into ``(n, prod k_i)``.

    The local index is mixed-radix with dimension 1 fastest.
    """
    def combine(acc: np.ndarray, nxt: np.ndarray) -> np.ndarray:
        n = acc.shape[0]
        return (nxt[:, :, None] * acc[:, None, :]).reshape(n, -1)

    return reduce(combine, per_dim)


def open_uniform_knots(degree: int, n_elements: int) -> np.ndarray:
    """Open uniform knot vector on [0, 1] with (p+1)-fold end knots."""
    interior = np.linspace(0.0, 1.0, n_elements + 1)
    return np.concatenate(
        [np.zeros(degree), interior, np.ones(degree)]
    )


def build_space(
    degrees: tuple[int, ...] | list[int],
    elements: tuple[int, ...] | list[int],
) -> BSplineSpace:
    """Build a tensor-product B-spline space and its IEN table.

    Args:
        degrees: Degree p_i >= 1 per dimension.
        elements: Element count nx_i >= 1 per dimension.

    Returns:
        The immutable ``BSplineSpace``.

    Raises:
        ValueError: If the vectors differ in length, are empty, or contain a
            zero degree or zero element count.
    """
    degrees = tuple(int(p) for p in degrees)
    elements = tuple(int(nx) for nx in elements)
    if not degrees or len(degrees) != len(elements):
        raise ValueError(
            f"degrees and elements must be non-empty and of equal length, "
            f"got {degrees} and {elements}"
        )
    if any(p < 1 for p in degrees):
        raise ValueError(f"Every degree must be >= 1, got {degrees}")
    if any(nx < 1 for nx in elements):
        raise ValueError(f"Every element count must be >= 1, got {elements}")

    knots = tuple(
        _readonly(open_uniform_knots(p, nx)) for p, nx in zip(degrees, elements)
    )
    n_functions = tuple(nx + p for nx, p in zip(elements, degrees))
    local_shape = tuple(p + 1 for p in degrees)

    element_multi = np.array(
        np.unravel_index(np.arange(int(np.prod(elements))), elements, order="F")
    ).T
    local_multi = np.array(
        np.unravel_index(np.arange(int(np.prod(local_shape))), local_shape, order="F")
    ).T
    # Element e_i owns univariate functions e_i .. e_i + p_i.
    global_multi = element_multi[:, None, :] + local_multi[None, :, :]
    ien_table = np.ravel_multi_index(
        tuple(global_multi[..., d] for d in range(len(degrees))),
        n_functions,
        order="F",
    ).astype(np.int64)

    space = BSplineSpace(
        degrees=degrees,
        elements=elements,
        knots=knots,
        ien_table=_readonly(ien_table),
    )
    logger.debug(
        "Built B-spline space p=%s nx=%s: N_elt=%d, n_b=%d, M=%d",
        degrees, elements, space.n_elements, space.n_local, space.n_global,
    )
    return space


# ---------------------------------------------------------------------------
# Element indexing
# ---------------------------------------------------------------------------


def element_index(space: BSplineSpace, multi_index: tuple[int, ...]) -> int:
    """Flatten an element multi-index (dimension 1 fastest)."""
    return int(np.ravel_multi_index(tuple(multi_index), space.elements, order="F"))


def element_multi_index(space: BSplineSpace, e: int) -> tuple[int, ...]:
    """Inverse of ``element_index``.

    Raises:
        IndexError: If *e* is not a valid element index.
    """
    if not 0 <= e < space.n_elements:
        raise IndexError(
            f"Element index {e} out of range [0, {space.n_elements})"
        )
    return tuple(int(i) for i in np.unravel_index(e, space.elements, order="F"))


def element_bounds(space: BSplineSpace, e: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the lower and upper corners of element *e*'s sub-box."""
    multi = np.array(element_multi_index(space, e), dtype=float)
    widths = 1.0 / np.array(space.elements, dtype=float)
    return multi * widths, (multi + 1.0) * widths


def _locate_many(space: BSplineSpace, points: np.ndarray) -> np.ndarray:
    """Element multi-indices ``(n, m)`` of unit points ``(n, m)``."""
    nx = np.array(space.elements)
    cells = np.floor(points * nx).astype(np.int64)
    return np.minimum(cells, nx - 1)


def _as_unit_points(space: BSplineSpace, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != space.m:
        raise ValueError(
            f"Points must have {space.m} coordinates, got shape {points.shape}"
        )
    if np.any(points < 0.0) or np.any(points > 1.0) or not np.all(np.isfinite(points)):
        raise ValueError("Points must lie in the unit cube [0, 1]^m")
    return points


def locate_element(space: BSplineSpace, xi: np.ndarray) -> tuple[int, ...]:
    """Return the multi-index of the half-open element box containing *xi*.

    ``xi_i = 1`` maps to the last element of dimension i.

    Raises:
        ValueError: If *xi* lies outside the unit cube.
    """
    points = _as_unit_points(space, np.asarray(xi, dtype=float).reshape(1, -1))
    return tuple(int(i) for i in _locate_many(space, points)[0])


# ---------------------------------------------------------------------------
# Basis evaluation
# ---------------------------------------------------------------------------


def univariate_basis(
    knots: np.ndarray,
    degree: int,
    span: np.ndarray | int,
    x: np.ndarray | float,
) -> np.ndarray:
    """Evaluate the p+1 nonzero B-splines of a knot span (Cox–de Boor).

    Triangular form of the recursion, vectorized over points. Functions
    ``span - p .. span`` are returned in increasing order. Outside the span
    the result is the polynomial piece of that span extended.

    Args:
        knots: Knot vector.
        degree: Polynomial degree p.
        span: Knot-span index (scalar or one per point).
        x: Evaluation point(s).

    Returns:
        Array ``(n, p + 1)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    span = np.broadcast_to(np.asarray(span, dtype=np.int64), x.shape)
    n = x.shape[0]
    values = np.zeros((n, degree + 1))
    values[:, 0] = 1.0
    left = np.zeros((n, degree + 1))
    right = np.zeros((n, degree + 1))
    for j in range(1, degree + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(n)
        for r in range(j):
            temp = values[:, r] / (right[:, r + 1] + left[:, j - r])
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
    return values


def cox_de_boor(knots: np.ndarray, i: int, degree: int, x: float) -> float:
    """Direct recursive value of the i-th univariate B-spline at *x*.

    Uses the 0/0 = 0 convention and closes the last nonempty interval on the
    right so that x = 1 is covered.
    """
    if degree == 0:
        if knots[i] <= x < knots[i + 1]:
            return 1.0
        last = knots[-1]
        if x == last and knots[i] < knots[i + 1] == last:
            return 1.0
        return 0.0
    value = 0.0
    denom_left = knots[i + degree] - knots[i]
    if denom_left > 0.0:
        value += (x - knots[i]) / denom_left * cox_de_boor(knots, i, degree - 1, x)
    denom_right = knots[i + degree + 1] - knots[i + 1]
    if denom_right > 0.0:
        value += (
            (knots[i + degree + 1] - x) / denom_right
            * cox_de_boor(knots, i + 1, degree - 1, x)
        )
    return value


def eval_global_basis(space: BSplineSpace, xi: np.ndarray) -> np.ndarray:
    """Evaluate all M global basis functions at *xi* by direct recursion."""
    xi = _as_unit_points(space, np.asarray(xi, dtype=float).reshape(1, -1))[0]
    per_dim = [
        np.array([[cox_de_boor(space.knots[d], i, space.degrees[d], xi[d])
                   for i in range(space.n_functions[d])]])
        for d in range(space.m)
    ]
    return _tensor_values(per_dim)[0]


def _local_values(
    space: BSplineSpace,
    element_multi: np.ndarray,
    points: np.ndarray,
) -> np.ndarray:
    per_dim = [
        univariate_basis(
            space.knots[d],
            space.degrees[d],
            element_multi[:, d] + space.degrees[d],
            points[:, d],
        )
        for d in range(space.m)
    ]
    return _tensor_values(per_dim)


def eval_basis_batch(
    space: BSplineSpace,
    points: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Locate and evaluate many unit points at once.

    Args:
        space: The spline space.
        points: Unit points ``(n, m)``.

    Returns:
        A tuple ``(elements, values)``: the flat element index of every point
        ``(n,)`` and its n_b local basis values ``(n, n_b)``.

    Raises:
        ValueError: If a point lies outside the unit cube.
    """
    points = _as_unit_points(space, points)
    multi = _locate_many(space, points)
    flat = np.ravel_multi_index(
        tuple(multi[:, d] for d in range(space.m)), space.elements, order="F"
    )
    return flat.astype(np.int64), _local_values(space, multi, points)


def eval_element_basis(space: BSplineSpace, e: int, points: np.ndarray) -> np.ndarray:
    """Evaluate the n_b B-splines of element *e* at points ``(n, m)``.

    Points may sit on the element's closed boundary, so a shared face can be
    evaluated from either neighbouring element.

    Returns:
        Array ``(n, n_b)``, columns in local order.

    Raises:
        IndexError: If *e* is not a valid element index.
        ValueError: If a point is not inside element *e*.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lower, upper = element_bounds(space, e)
    if points.shape[1] != space.m:
        raise ValueError(f"Points must have {space.m} coordinates, got shape {points.shape}")
    outside = np.any(
        (points < lower - ELEMENT_TOLERANCE) | (points > upper + ELEMENT_TOLERANCE), axis=1
    )
    if np.any(outside):
        first = points[np.argmax(outside)]
        raise ValueError(f"Point {first.tolist()} is not inside element {e}")
    multi = np.broadcast_to(
        np.array(element_multi_index(space, e)), (points.shape[0], space.m)
    )
    return _local_values(space, multi, points)


def eval_local_basis(space: BSplineSpace, e: int, xi: np.ndarray) -> np.ndarray:
    """Evaluate the n_b B-splines supported on element *e* at one point *xi*.

    Raises:
        IndexError: If *e* is not a valid element index.
        ValueError: If *xi* is not inside element *e*.
    """
    xi = np.asarray(xi, dtype=float).reshape(1, -1)
    return eval_element_basis(space, e, xi)[0]


def ien(space: BSplineSpace, e: int, j: int) -> int:
    """Global index of local function *j* of element *e*.

    Raises:
        IndexError: If *e* or *j* is out of range.
    """
    if not 0 <= e < space.n_elements or not 0 <= j < space.n_local:
        raise IndexError(
            f"IEN index ({e}, {j}) out of range "
            f"({space.n_elements} elements, {space.n_local} local functions)"
        )
    return int(space.ien_table[e, j])


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def element_quadrature(
    space: BSplineSpace,
    e: int,
    points_per_dim: tuple[int, ...] | list[int],
) -> QuadratureRule:
    """Tensor Gauss–Legendre rule mapped to element *e*.

    Exact for polynomials of per-dimension degree <= 2 * points_per_dim_i - 1.
    Weights sum to the element volume.

    Raises:
        ValueError: If a point count is < 1 or the vector has the wrong length.
        IndexError: If *e* is not a valid element index.
    """
    points_per_dim = tuple(int(n) for n in points_per_dim)
    if len(points_per_dim) != space.m or any(n < 1 for n in points_per_dim):
        raise ValueError(
            f"points_per_dim must hold {space.m} counts >= 1, got {points_per_dim}"
        )
    lower, upper = element_bounds(space, e)
    node_axes: list[np.ndarray] = []
    weight_axes: list[np.ndarray] = []
    for d, n in enumerate(points_per_dim):
        gauss, weights = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (upper[d] - lower[d])
        node_axes.append(lower[d] + half * (gauss + 1.0))
        weight_axes.append(half * weights)
    nodes = _tensor_grid(node_axes)
    weights = np.prod(_tensor_grid(weight_axes), axis=1)
    return QuadratureRule(nodes=nodes, weights=weights)

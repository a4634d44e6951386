"""Matching polytopes: doubly stochastic matrices and one-sided (row
stochastic) maps, their linear hulls, orthonormal bases, projections and
vertex tests.

Conventions used throughout the package:

* ``vec(X)`` stacks columns (Fortran order), so ``(B (x) A) vec(X) =
  vec(A X B^T)``.
* The linear hull of the doubly stochastic polytope is the set of square
  matrices with zero row and column sums; its dimension is ``(n-1)^2``.
* The linear hull of the one-sided polytope is the set of ``n x n0``
  matrices with zero row sums; its dimension is ``n (n0 - 1)``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConvergenceError, DimensionError
from ._utils import as_generator, as_float_matrix

ENTRY_TOL = 1e-12
SUM_TOL = 1e-9
BASIS_TOL = 1e-12


class PolytopeKind(Enum):
    PERMUTATION = "permutation"
    ONESIDED = "onesided"


@dataclass(frozen=True)
class MatchingState:
    """A point of a matching polytope.

    ``kind=PERMUTATION`` requires a square nonnegative matrix with unit row
    and column sums; ``kind=ONESIDED`` only constrains the rows.
    """

    entries: np.ndarray
    kind: PolytopeKind

    def __post_init__(self):
        entries = as_float_matrix(self.entries, "entries")
        object.__setattr__(self, "entries", entries)
        n, n0 = entries.shape
        if entries.size == 0:
            raise DimensionError("entries must be nonempty")
        if entries.min() < -ENTRY_TOL:
            raise ValueError(
                f"entries must be nonnegative, min is {entries.min():.3e}"
            )
        row_sums = entries.sum(axis=1)
        if np.max(np.abs(row_sums - 1.0)) > SUM_TOL:
            raise ValueError("row sums must equal 1")
        if self.kind is PolytopeKind.PERMUTATION:
            if n != n0:
                raise DimensionError(
                    f"permutation polytope needs a square matrix, got {n}x{n0}"
                )
            col_sums = entries.sum(axis=0)
            if np.max(np.abs(col_sums - 1.0)) > SUM_TOL:
                raise ValueError("column sums must equal 1")

    @property
    def shape(self):
        return self.entries.shape

    def descriptor(self):
        n, n0 = self.entries.shape
        return PolytopeDescriptor(self.kind, n, n0)


@dataclass(frozen=True)
class ZeroSumBasis:
    """Orthonormal basis of the zero-sum hyperplane ``1^perp`` in R^n.

    ``columns`` is n x (n-1) with orthonormal columns orthogonal to the
    all-ones vector.
    """

    columns: np.ndarray

    def __post_init__(self):
        cols = as_float_matrix(self.columns, "columns")
        object.__setattr__(self, "columns", cols)
        n, k = cols.shape
        if k != n - 1:
            raise DimensionError(f"expected n x (n-1) basis, got {n}x{k}")
        gram = cols.T @ cols
        if np.max(np.abs(gram - np.eye(k))) > BASIS_TOL:
            raise ValueError("basis columns are not orthonormal")
        if np.max(np.abs(cols.T @ np.ones(n))) > BASIS_TOL:
            raise ValueError("basis columns are not orthogonal to 1")

    @property
    def n(self):
        return self.columns.shape[0]


@dataclass(frozen=True)
class PolytopeDescriptor:
    """Shape and kind of a matching polytope, with its lin-space dimension."""

    kind: PolytopeKind
    n: int
    n0: int = field(default=None)

    def __post_init__(self):
        if self.n0 is None:
            object.__setattr__(self, "n0", self.n)
        if self.n < 2 or self.n0 < 2:
            raise DimensionError("polytope needs at least 2 vertices per side")
        if self.kind is PolytopeKind.PERMUTATION and self.n != self.n0:
            raise DimensionError("permutation polytope requires n == n0")

    @property
    def lin_dimension(self):
        if self.kind is PolytopeKind.PERMUTATION:
            return (self.n - 1) ** 2
        return self.n * (self.n0 - 1)

    def basis(self):
        """Zero-sum basis used to parameterize the lin space."""
        if self.kind is PolytopeKind.PERMUTATION:
            return make_zero_sum_basis(self.n)
        return make_zero_sum_basis(self.n0)


def make_zero_sum_basis(n):
    """Deterministic orthonormal basis of ``1^perp`` in R^n.

    Built from the Householder reflection that maps e_1 to 1/sqrt(n):
    columns 2..n of the reflection are orthonormal and orthogonal to the
    all-ones vector.
    """
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    w = np.full(n, 1.0 / np.sqrt(n))
    u = -w.copy()
    u[0] += 1.0  # e_1 - w, never zero for n >= 2
    u /= np.linalg.norm(u)
    house = np.eye(n) - 2.0 * np.outer(u, u)
    return ZeroSumBasis(house[:, 1:])


def sinkhorn_project(x, tol=1e-10, max_iters=10_000):
    """Alternating row/column normalization onto the doubly stochastic set.

    Entries are clamped below at 1e-12 first, so any nonnegative square
    matrix is a valid input. Raises :class:`ConvergenceError` (carrying the
    final residual) if the residual does not drop below ``tol`` within
    ``max_iters`` sweeps.
    """
    x = as_float_matrix(x, "x")
    n, n0 = x.shape
    if n != n0:
        raise DimensionError(f"need a square matrix, got {n}x{n0}")
    if x.min() < -ENTRY_TOL:
        raise ValueError("input must be nonnegative")
    x = np.maximum(x, ENTRY_TOL)
    residual = np.inf
    for _ in range(max_iters):
        x = x / x.sum(axis=1, keepdims=True)
        x = x / x.sum(axis=0, keepdims=True)
        residual = max(
            np.max(np.abs(x.sum(axis=1) - 1.0)),
            np.max(np.abs(x.sum(axis=0) - 1.0)),
        )
        if residual <= tol:
            return MatchingState(x, PolytopeKind.PERMUTATION)
    raise ConvergenceError(
        f"sinkhorn did not converge in {max_iters} iterations "
        f"(residual {residual:.3e})",
        residual=residual,
    )


def is_vertex(state, tol=1e-6):
    """True when every entry is within ``tol`` of {0, 1} and the 0/1 pattern
    is a valid matching (for permutations: exactly one 1 per row and column;
    one-sided maps may send several rows to the same column)."""
    x = state.entries
    rounded = np.where(x > 0.5, 1.0, 0.0)
    if np.max(np.abs(x - rounded)) > tol:
        return False
    if np.any(rounded.sum(axis=1) != 1.0):
        return False
    if state.kind is PolytopeKind.PERMUTATION:
        return bool(np.all(rounded.sum(axis=0) == 1.0))
    return True


def random_interior_point(descriptor, seed=None):
    """Strictly positive random point of the polytope (Sinkhorn-projected
    for the permutation kind, row-normalized otherwise)."""
    rng = as_generator(seed)
    raw = rng.uniform(0.1, 1.0, size=(descriptor.n, descriptor.n0))
    if descriptor.kind is PolytopeKind.PERMUTATION:
        return sinkhorn_project(raw)
    raw /= raw.sum(axis=1, keepdims=True)
    return MatchingState(raw, PolytopeKind.ONESIDED)


def random_direction_in_lin(descriptor, seed=None):
    """Uniform random direction on the unit sphere of the polytope's lin
    space, returned as an n x n0 matrix of Frobenius norm 1.

    The Gaussian coefficient matrix is pushed through the orthonormal basis
    of the lin space (F (x) F for doubly stochastic, F (x) I one-sided), so
    the direction is uniform by rotation invariance.
    """
    rng = as_generator(seed)
    f = descriptor.basis().columns
    if descriptor.kind is PolytopeKind.PERMUTATION:
        y = rng.standard_normal((descriptor.n - 1, descriptor.n - 1))
        v = f @ y @ f.T
    else:
        y = rng.standard_normal((descriptor.n, descriptor.n0 - 1))
        v = y @ f.T
    return v / np.linalg.norm(v)


def face_dimension(state, tol=1e-6):
    """Dimension of the minimal face of the polytope containing ``state``.

    For the doubly stochastic polytope the minimal face is determined by
    the support pattern S: its dimension is ``|S| - 2n + c`` where c is the
    number of connected components of the bipartite support graph. For the
    one-sided polytope the faces are products of simplex faces, dimension
    ``|S| - n``. Vertices have dimension 0.
    """
    x = state.entries
    n, n0 = x.shape
    support = x > tol
    if state.kind is PolytopeKind.ONESIDED:
        return int(support.sum() - n)
    # count components of the bipartite graph on rows+cols with edges S
    parent = list(range(n + n0))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(*np.nonzero(support)):
        ri, cj = find(i), find(n + j)
        if ri != cj:
            parent[ri] = cj
    components = len({find(k) for k in range(n + n0)})
    return int(support.sum() - (n + n0) + components)

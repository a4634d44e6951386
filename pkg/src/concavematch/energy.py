"""Quadratic matching energies E(X) = vec(X)^T M vec(X) + a^T vec(X).

The Hessian M is kept as a signed sum of Kronecker terms and never
materialized at its full (n*n0)^2 size: with column-stacked vec,
``(B (x) A) vec(X) = vec(A X B^T)``, so the action of each term is two
small matrix products. A second Hessian flavor stores a dense matrix in
the coordinates of the polytope's lin space, which is how random-ensemble
energies are lifted onto the doubly stochastic polytope.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DenseLimitError, DimensionError
from .polytope import PolytopeKind

SYMMETRY_TOL = 1e-12


def _mat(x):
    """Unwrap AffinityMatrix / MatchingState / array-likes to ndarray."""
    if hasattr(x, "values"):
        return np.asarray(x.values, dtype=float)
    if hasattr(x, "entries"):
        return np.asarray(x.entries, dtype=float)
    return np.asarray(x, dtype=float)


def _check_symmetric(m, name):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got {m.shape}")
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
        raise ValueError(f"{name} must be symmetric")


@dataclass(frozen=True)
class SegmentQuadratic:
    """Coefficients of q(t) = E((1-t) X0 + t X1) = c0 + c1 t + c2 t^2."""

    c0: float
    c1: float
    c2: float

    def value(self, t):
        return self.c0 + self.c1 * t + self.c2 * t * t


class _QuadraticEnergy:
    """Shared arithmetic for Hessian representations exposing ``apply``
    (the action X -> M[X], reshaped) and ``linear`` (the n x n0 matrix a)."""

    def value(self, x):
        x = _mat(x)
        return float(np.sum(x * self.apply(x)) + np.sum(self.linear * x))

    def gradient(self, x):
        x = _mat(x)
        return 2.0 * self.apply(x) + self.linear

    def quadratic_form(self, v):
        """vec(v)^T M vec(v), without the linear part."""
        v = _mat(v)
        return float(np.sum(v * self.apply(v)))

    def segment(self, x0, x1):
        x0, x1 = _mat(x0), _mat(x1)
        delta = x1 - x0
        applied = self.apply(delta)
        c2 = float(np.sum(delta * applied))
        c1 = float(2.0 * np.sum(x0 * applied) + np.sum(self.linear * delta))
        return SegmentQuadratic(self.value(x0), c1, c2)


class KroneckerHessian(_QuadraticEnergy):
    """M = sum_k s_k (B_k (x) A_k), plus a linear term.

    ``terms`` is a sequence of (weight, B, A) with B symmetric n0 x n0 and
    A symmetric n x n. The action on an n x n0 matrix X is
    ``sum_k s_k A_k X B_k``.
    """

    def __init__(self, terms, linear=None, shape=None):
        cleaned = []
        for s, b, a in terms:
            a = _mat(a)
            b = _mat(b)
            _check_symmetric(a, "A factor")
            _check_symmetric(b, "B factor")
            cleaned.append((float(s), b, a))
        if not cleaned and shape is None and linear is None:
            raise DimensionError("empty Hessian needs an explicit shape")
        if cleaned:
            inferred = (cleaned[0][2].shape[0], cleaned[0][1].shape[0])
        elif linear is not None:
            inferred = np.asarray(linear).shape
        else:
            inferred = tuple(shape)
        for _, b, a in cleaned:
            if (a.shape[0], b.shape[0]) != inferred:
                raise DimensionError("all terms must act on the same shape")
        self.terms = tuple(cleaned)
        self._shape = inferred
        if linear is None:
            self.linear = np.zeros(inferred)
        else:
            self.linear = np.asarray(linear, dtype=float)
            if self.linear.shape != inferred:
                raise DimensionError(
                    f"linear term shape {self.linear.shape} != {inferred}"
                )

    @property
    def shape(self):
        return self._shape

    def apply(self, x):
        x = _mat(x)
        if x.shape != self._shape:
            raise DimensionError(f"X has shape {x.shape}, expected {self._shape}")
        out = np.zeros_like(x)
        for s, b, a in self.terms:
            out += s * (a @ x @ b)
        return out

    def dense(self):
        """Materialized (n*n0)^2 Hessian, for small-size oracle checks."""
        n, n0 = self._shape
        m = np.zeros((n * n0, n * n0))
        for s, b, a in self.terms:
            m += s * np.kron(b, a)
        return m


class LinSpaceHessian(_QuadraticEnergy):
    """Quadratic energy given by a dense symmetric matrix in the
    orthonormal coordinates of the polytope's lin space.

    Lifts E(y) = y^T M y, y = coordinates of X, onto polytope points:
    for the doubly stochastic polytope y = vec(F^T X F), one-sided
    y = vec(X F). The centered part of X is what the coordinates see, so
    the energy is constant in the direction of the polytope's affine
    offset.
    """

    def __init__(self, matrix, descriptor):
        matrix = np.asarray(matrix, dtype=float)
        _check_symmetric(matrix, "lin-space Hessian")
        if matrix.shape[0] != descriptor.lin_dimension:
            raise DimensionError(
                f"matrix dimension {matrix.shape[0]} != lin dimension "
                f"{descriptor.lin_dimension}"
            )
        self.matrix = matrix
        self.descriptor = descriptor
        self._f = descriptor.basis().columns
        self._shape = (descriptor.n, descriptor.n0)
        self.linear = np.zeros(self._shape)

    @property
    def shape(self):
        return self._shape

    def apply(self, x):
        x = _mat(x)
        f = self._f
        if self.descriptor.kind is PolytopeKind.PERMUTATION:
            y = f.T @ x @ f
            z = (self.matrix @ y.reshape(-1, order="F")).reshape(y.shape, order="F")
            return f @ z @ f.T
        y = x @ f
        z = (self.matrix @ y.reshape(-1, order="F")).reshape(y.shape, order="F")
        return z @ f.T


def hessian_E2(a, b):
    """Hessian of E2(X) = -tr(B X^T A X), the single term -(B (x) A)."""
    a, b = _mat(a), _mat(b)
    _check_symmetric(a, "A")
    _check_symmetric(b, "B")
    return KroneckerHessian([(-1.0, b, a)])


def energy_E1(a, b, x):
    """E1(X) = ||A X - X B||_F^2.

    Over permutations this equals ||A||_F^2 + ||B||_F^2 + 2 E2(X), so E1
    and E2 share minimizers there.
    """
    a, b, x = _mat(a), _mat(b), _mat(x)
    r = a @ x - x @ b
    return float(np.sum(r * r))


def hessian_onesided(a, b):
    """Hessian of the one-sided matching energy
    sum_{ijkl} X_ij X_kl (A_ik - B_jl)^2.

    Expanding the square gives M = -2 (B (x) A) + (11^T (x) A.^2)
    + (B.^2 (x) 11^T), with .^2 the elementwise square. The value is a sum
    of squares, hence nonnegative on nonnegative X, and zero at the
    identity when B = A.
    """
    a, b = _mat(a), _mat(b)
    _check_symmetric(a, "A")
    _check_symmetric(b, "B")
    n, n0 = a.shape[0], b.shape[0]
    ones_n = np.ones((n, n))
    ones_n0 = np.ones((n0, n0))
    return KroneckerHessian(
        [(-2.0, b, a), (1.0, ones_n0, a**2), (1.0, b**2, ones_n)]
    )


def energy_value(h, x):
    return h.value(x)


def gradient(h, x):
    """Gradient of E at X: 2 sum_k s_k A_k X B_k + a."""
    return h.gradient(x)


def segment_quadratic(h, x0, x1):
    """Quadratic profile of E along the segment from X0 to X1.

    c2 = vec(D)^T M vec(D), c1 = 2 vec(X0)^T M vec(D) + a^T vec(D),
    c0 = E(X0), with D = X1 - X0; everything evaluated through the
    Kronecker action.
    """
    return h.segment(x0, x1)


DENSE_SPECTRUM_LIMIT = 64


def restricted_spectrum(h, descriptor, dense_limit=DENSE_SPECTRUM_LIMIT):
    """Eigenvalues of the Hessian restricted to the polytope's lin space,
    sorted ascending.

    Single Kronecker terms restrict to a Kronecker product of small
    matrices, so their spectrum is the outer product of factor spectra and
    any size is cheap. Multi-term Hessians need the dense restricted
    matrix, which is only formed for n <= ``dense_limit``; above that a
    :class:`DenseLimitError` suggests Monte-Carlo direction sampling.
    """
    if isinstance(h, LinSpaceHessian):
        return np.sort(np.linalg.eigvalsh(h.matrix))
    f = descriptor.basis().columns
    permutation = descriptor.kind is PolytopeKind.PERMUTATION
    if len(h.terms) == 1:
        s, b, a = h.terms[0]
        b_eigs = np.linalg.eigvalsh(f.T @ b @ f)
        a_eigs = np.linalg.eigvalsh(f.T @ a @ f) if permutation else np.linalg.eigvalsh(a)
        return np.sort(s * np.outer(b_eigs, a_eigs).ravel())
    if descriptor.n > dense_limit:
        raise DenseLimitError(
            f"dense restriction of a {len(h.terms)}-term Hessian is limited to "
            f"n <= {dense_limit} (got n = {descriptor.n}); use Monte-Carlo "
            "direction sampling (mc_convexity_probability) instead"
        )
    dim = descriptor.lin_dimension
    restricted = np.zeros((dim, dim))
    for s, b, a in h.terms:
        fb = f.T @ b @ f
        fa = f.T @ a @ f if permutation else a
        restricted += s * np.kron(fb, fa)
    return np.sort(np.linalg.eigvalsh(restricted))

"""Corpus workflows: all-pairs matching dissimilarity and its planar
embedding by classical multidimensional scaling."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEmbeddingError, DimensionError
from .polytope import PolytopeDescriptor, PolytopeKind
from .energy import hessian_E2, hessian_onesided
from .solver import SolverConfig, multi_start
from ._utils import as_seed_sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative dissimilarities with a zero diagonal.

    Entries of failed pairs may be NaN; symmetry is enforced by averaging
    with the transpose (after checking the asymmetry is below 1e-9).
    """

    values: np.ndarray
    labels: tuple

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = vals.shape[0]
        if vals.ndim != 2 or vals.shape[1] != n:
            raise DimensionError(f"dissimilarity matrix must be square, got {vals.shape}")
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != n:
            raise DimensionError(f"{len(labels)} labels for {n} items")
        asym = np.abs(vals - vals.T)
        if np.any(np.nan_to_num(asym) > 1e-9):
            raise ValueError("dissimilarity matrix is not symmetric")
        vals = 0.5 * (vals + vals.T)
        np.fill_diagonal(vals, 0.0)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def missing_pairs(self):
        i, j = np.nonzero(np.isnan(self.values))
        return [(int(a), int(b)) for a, b in zip(i, j) if a < b]


def pair_dissimilarity(a, b, x):
    """Matching residual sum_{ik} (A_ik - B_{s(i) s(k)})^2 of a permutation
    match s; equals the one-sided matching energy evaluated at X."""
    a = a.values if hasattr(a, "values") else np.asarray(a, dtype=float)
    b = b.values if hasattr(b, "values") else np.asarray(b, dtype=float)
    x = x.entries if hasattr(x, "entries") else np.asarray(x, dtype=float)
    if x.ndim == 1:
        perm = np.asarray(x, dtype=int)
    else:
        rounded = np.where(x > 0.5, 1, 0)
        if np.max(np.abs(x - rounded)) > 1e-9 or np.any(
            rounded.sum(axis=0) != 1
        ) or np.any(rounded.sum(axis=1) != 1):
            raise ValueError("x must be a permutation")
        perm = np.argmax(rounded, axis=1)
    n = a.shape[0]
    if perm.size != n or b.shape[0] != n:
        raise DimensionError("permutation size must match both affinities")
    diff = a - b[np.ix_(perm, perm)]
    return float(np.sum(diff * diff))


def _solve_pair(a, b, kind, anchors, restarts, config, seed):
    if kind is PolytopeKind.PERMUTATION:
        h = hessian_E2(a, b)
        descriptor = PolytopeDescriptor(kind, a.n, b.n)
        best = multi_start(h, descriptor, anchors, restarts, config, seed)
        return pair_dissimilarity(a, b, best.x)
    h = hessian_onesided(a, b)
    descriptor = PolytopeDescriptor(kind, a.n, b.n)
    best = multi_start(h, descriptor, anchors, restarts, config, seed)
    return best.energy


def all_pairs_dissimilarity(
    affinities,
    labels=None,
    kind=PolytopeKind.PERMUTATION,
    anchors=3,
    restarts=10,
    config=None,
    seed=None,
    threads=1,
):
    """Dissimilarity matrix over a corpus of affinity matrices.

    Every unordered pair is matched with :func:`solver.multi_start` and its
    residual recorded. In one-sided mode (sizes may differ) both directions
    are solved and averaged. Failed pairs are logged and left as NaN; they
    do not abort the run. Returns ``(DissimilarityMatrix, failures)`` where
    failures is a list of (i, j, message).
    """
    items = list(affinities)
    if len(items) < 2:
        raise DimensionError("corpus needs at least 2 items")
    if labels is None:
        labels = [f"item{i}" for i in range(len(items))]
    if config is None:
        config = SolverConfig()
    n = len(items)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    streams = as_seed_sequence(seed).spawn(len(pairs))

    def solve(index):
        i, j = pairs[index]
        pair_seed = streams[index]
        a, b = items[i], items[j]
        if kind is PolytopeKind.PERMUTATION:
            return _solve_pair(a, b, kind, anchors, restarts, config, pair_seed)
        children = pair_seed.spawn(2)
        forward = _solve_pair(a, b, kind, anchors, restarts, config, children[0])
        backward = _solve_pair(b, a, kind, anchors, restarts, config, children[1])
        return 0.5 * (forward + backward)

    values = np.zeros((n, n))
    failures = []
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_guarded(solve), range(len(pairs))))
    else:
        outcomes = [_guarded(solve)(k) for k in range(len(pairs))]
    for (i, j), outcome in zip(pairs, outcomes):
        if isinstance(outcome, Exception):
            logger.warning("pair (%d, %d) failed: %s", i, j, outcome)
            failures.append((i, j, str(outcome)))
            values[i, j] = values[j, i] = np.nan
        else:
            values[i, j] = values[j, i] = outcome
    return DissimilarityMatrix(values, tuple(labels)), failures


def _guarded(fn):
    def run(k):
        try:
            return fn(k)
        except Exception as exc:  # noqa: BLE001 - per-pair isolation
            return exc

    return run


def classical_mds(dissimilarity, k):
    """Classical (Torgerson) multidimensional scaling.

    Double-centers -1/2 J D.^2 J, takes the top-k nonnegative eigenpairs,
    and scales eigenvectors by sqrt(eigenvalue). Columns are sign-fixed so
    their first nonzero coordinate is positive; axes short of positive
    eigenvalues are zero-padded. Raises
    :class:`DegenerateEmbeddingError` when a nonzero D has no positive
    eigenvalue to embed.
    """
    d = dissimilarity.values if hasattr(dissimilarity, "values") else np.asarray(
        dissimilarity, dtype=float
    )
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise DimensionError(f"dissimilarity must be square, got {d.shape}")
    if np.any(np.isnan(d)):
        raise ValueError("cannot embed a matrix with missing entries")
    if not 1 <= k <= n - 1:
        raise DimensionError(f"target dimension k={k} must lie in 1..{n - 1}")
    center = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * center @ (d * d) @ center
    gram = 0.5 * (gram + gram.T)
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    scale = max(float(np.max(np.abs(eigenvalues))), 0.0)
    if np.any(d != 0.0) and eigenvalues[0] <= 1e-12 * max(scale, 1.0):
        raise DegenerateEmbeddingError("no positive eigenvalue to embed")
    coords = np.zeros((n, k))
    usable = min(k, int(np.sum(eigenvalues > 0.0)))
    for axis in range(usable):
        col = eigenvectors[:, axis] * np.sqrt(eigenvalues[axis])
        nonzero = np.flatnonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))
        if nonzero.size and col[nonzero[0]] < 0.0:
            col = -col
        coords[:, axis] = col
    return coords

"""Edge affinity matrices from point clouds, weighted graphs and meshes.

The kernels below are the standard conditionally positive/negative definite
families used for matching: raw and squared distances, multiquadrics,
Gaussians, the compactly supported Wendland functions, and spherical
distances. Raw Euclidean distance is conditionally negative definite of
order 1, which is what makes the quadratic matching energy conditionally
concave (see :mod:`concavematch.concavity`).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import shortest_path

from .errors import (
    DimensionError,
    DisconnectedGraphError,
    DuplicatePointsError,
)
from .polytope import make_zero_sum_basis

DISTINCT_TOL = 1e-12
SYMMETRY_TOL = 1e-12
UNIT_NORM_TOL = 1e-9

KERNEL_NAMES = (
    "distance",
    "squared-distance",
    "multiquadric",
    "gaussian",
    "wendland-c30",
    "wendland-c31",
    "spherical-distance",
    "spherical-gaussian",
)


@dataclass(frozen=True)
class PointCloud:
    """Pairwise-distinct points in R^d, one per row."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise DimensionError(
                f"need at least two points as an (n, d) array, got {pts.shape}"
            )
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights, 0-based vertex ids."""

    n: int
    edges: tuple  # of (i, j, weight)

    def __post_init__(self):
        cleaned = []
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DimensionError(f"edge ({i},{j}) outside 0..{self.n - 1}")
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if w <= 0:
                raise ValueError(f"edge ({i},{j}) has nonpositive weight {w}")
            cleaned.append((i, j, w))
        object.__setattr__(self, "edges", tuple(cleaned))

    def adjacency(self):
        # parallel edges keep the minimum weight (COO conversion would sum)
        best = {}
        for i, j, w in self.edges:
            key = (min(i, j), max(i, j))
            if key not in best or w < best[key]:
                best[key] = w
        rows, cols, vals = [], [], []
        for (i, j), w in best.items():
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        return scipy.sparse.coo_matrix(
            (vals, (rows, cols)), shape=(self.n, self.n)
        ).tocsr()


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric affinity matrix with a provenance tag.

    ``provenance`` is "distance", "squared", or "kernel:<name>(...)";
    distance-type matrices must have a zero diagonal.
    """

    values: np.ndarray
    provenance: str = "distance"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise DimensionError(f"affinity matrix must be square, got {vals.shape}")
        if np.max(np.abs(vals - vals.T)) > SYMMETRY_TOL:
            raise ValueError("affinity matrix must be symmetric")
        if self.is_distance and np.max(np.abs(np.diag(vals))) > SYMMETRY_TOL:
            raise ValueError("distance-type affinity must have zero diagonal")
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def is_distance(self):
        return self.provenance == "distance"


@dataclass(frozen=True)
class KernelSpec:
    """Elementwise kernel applied to a distance matrix.

    Parameters by kernel: multiquadric(c >= 0, beta in (0,1]); gaussian
    (tau > 0); wendland-c30 / wendland-c31 (scale > 0 or None to use the
    max distance; c30 additionally takes variant "linear" for (1-d)_+ or
    "quadratic" for (1-d^2)_+); spherical-distance (gamma in (0,1]);
    spherical-gaussian (tau > 0, gamma in (0,1]).
    """

    name: str
    c: float = 1.0
    beta: float = 1.0
    tau: float = 1.0
    gamma: float = 1.0
    scale: float = None
    variant: str = "linear"

    def __post_init__(self):
        if self.name not in KERNEL_NAMES:
            raise ValueError(f"unknown kernel {self.name!r}, expected one of {KERNEL_NAMES}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.c < 0.0:
            raise ValueError("c must be nonnegative")
        if self.scale is not None and self.scale <= 0.0:
            raise ValueError("scale must be positive")
        if self.variant not in ("linear", "quadratic"):
            raise ValueError("variant must be 'linear' or 'quadratic'")


def pairwise_euclidean(cloud):
    """Euclidean distance matrix of a point cloud.

    Raises :class:`DuplicatePointsError` when two points coincide, since
    conditional definiteness of the kernels assumes distinct points.
    """
    pts = cloud.points
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)
    off_diag = dist + np.eye(cloud.n)
    if off_diag.min() <= DISTINCT_TOL:
        i, j = divmod(int(np.argmin(off_diag)), cloud.n)
        raise DuplicatePointsError(f"points {min(i, j)} and {max(i, j)} coincide")
    return AffinityMatrix(dist, "distance")


def spherical_distances(cloud, gamma=1.0):
    """Great-circle distance matrix arccos(<x_i, x_j>)^gamma for unit-norm
    points; inner products are clamped to [-1, 1] before arccos."""
    pts = cloud.points
    norms = np.linalg.norm(pts, axis=1)
    if np.max(np.abs(norms - 1.0)) > UNIT_NORM_TOL:
        raise ValueError(
            f"points must have unit norm (max deviation {np.max(np.abs(norms - 1.0)):.2e})"
        )
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    gram = np.clip(pts @ pts.T, -1.0, 1.0)
    dist = np.arccos(gram)
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)
    off_diag = dist + np.eye(cloud.n)
    if off_diag.min() <= DISTINCT_TOL:
        i, j = divmod(int(np.argmin(off_diag)), cloud.n)
        raise DuplicatePointsError(f"points {min(i, j)} and {max(i, j)} coincide")
    if gamma != 1.0:
        dist = dist**gamma
    return AffinityMatrix(dist, "distance")


def geodesic_distances(graph):
    """All-pairs shortest-path distances of a connected weighted graph,
    computed by Dijkstra from every source."""
    dist = shortest_path(graph.adjacency(), method="D", directed=False)
    if not np.all(np.isfinite(dist)):
        bad = int(np.argwhere(~np.isfinite(dist))[0, 1])
        raise DisconnectedGraphError(f"vertex {bad} is unreachable")
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)
    return AffinityMatrix(dist, "distance")


def apply_kernel(distances, spec):
    """Apply a :class:`KernelSpec` elementwise to a distance-type affinity
    matrix, returning a new tagged matrix."""
    if not distances.is_distance:
        raise ValueError(
            f"kernel input must be distance-type, got provenance {distances.provenance!r}"
        )
    d = distances.values
    name = spec.name
    if name == "distance":
        return AffinityMatrix(d, "distance")
    if name == "squared-distance":
        return AffinityMatrix(d**2, "squared")
    if name == "multiquadric":
        vals = (spec.c**2 + d**2) ** spec.beta
        tag = f"kernel:multiquadric(c={spec.c:g},beta={spec.beta:g})"
        return AffinityMatrix(vals, tag)
    if name == "gaussian":
        vals = np.exp(-(spec.tau**2) * d**2)
        return AffinityMatrix(vals, f"kernel:gaussian(tau={spec.tau:g})")
    if name == "spherical-distance":
        return AffinityMatrix(d**spec.gamma, "distance")
    if name == "spherical-gaussian":
        vals = np.exp(-(spec.tau**2) * d**spec.gamma)
        tag = f"kernel:spherical-gaussian(tau={spec.tau:g},gamma={spec.gamma:g})"
        return AffinityMatrix(vals, tag)
    # Wendland kernels have support [0, 1]; rescale so it covers the data
    s = spec.scale if spec.scale is not None else float(d.max())
    if s <= 0:
        raise ValueError("cannot scale Wendland kernel on an all-zero matrix")
    r = d / s
    if name == "wendland-c30":
        if spec.variant == "quadratic":
            vals = np.maximum(1.0 - r**2, 0.0)
        else:
            vals = np.maximum(1.0 - r, 0.0)
        tag = f"kernel:wendland-c30(scale={s:g},variant={spec.variant})"
        return AffinityMatrix(vals, tag)
    # wendland-c31
    vals = np.maximum(1.0 - r, 0.0) ** 4 * (4.0 * r + 1.0)
    return AffinityMatrix(vals, f"kernel:wendland-c31(scale={s:g})")


@dataclass(frozen=True)
class SpectrumSummary:
    """Signed spectrum of an affinity matrix restricted to the zero-sum
    hyperplane."""

    eigenvalues: np.ndarray
    classification: str  # "positive" | "negative" | "indefinite"
    margin: float

    def __post_init__(self):
        object.__setattr__(
            self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float)
        )


def cpd_order1_test(affinity, basis=None, tol=0.0):
    """Spectrum of F^T A F, the restriction of A to zero-sum vectors.

    A function that is conditionally positive (negative) definite of order 1
    produces a strictly positive (negative) spectrum here for distinct
    points. Returns the eigenvalues, a definiteness class on the zero-sum
    hyperplane, and ``margin = min |eigenvalue|``.
    """
    values = affinity.values if hasattr(affinity, "values") else np.asarray(affinity, float)
    n = values.shape[0]
    if basis is None:
        basis = make_zero_sum_basis(n)
    f = basis.columns
    if f.shape[0] != n:
        raise DimensionError(
            f"basis is for dimension {f.shape[0]}, affinity has {n}"
        )
    eigs = np.linalg.eigvalsh(f.T @ values @ f)
    if eigs.min() > tol:
        classification = "positive"
    elif eigs.max() < -tol:
        classification = "negative"
    else:
        classification = "indefinite"
    margin = float(np.min(np.abs(eigs))) if eigs.size else 0.0
    return SpectrumSummary(eigs, classification, margin)

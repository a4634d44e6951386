"""Triangle-mesh helpers: synthetic sphere meshes and reduction of a mesh
to a weighted edge graph for geodesic computations."""

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DimensionError
from .affinity import WeightedGraph
from ._utils import as_generator


def random_sphere_mesh(n, seed=None):
    """Random triangulated unit sphere with ``n`` vertices.

    Vertices are normalized Gaussian samples; the triangulation is the
    convex hull, which for points on a sphere is a valid closed surface
    mesh. Returns ``(points, triangles)``.
    """
    if n < 4:
        raise DimensionError("a sphere mesh needs at least 4 vertices")
    rng = as_generator(seed)
    pts = rng.standard_normal((n, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    hull = ConvexHull(pts)
    return pts, hull.simplices.astype(int)


def mesh_edge_graph(points, triangles):
    """Weighted graph on the mesh edges, weights = Euclidean edge lengths."""
    points = np.asarray(points, dtype=float)
    triangles = np.asarray(triangles, dtype=int)
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise DimensionError(f"triangles must be (m, 3), got {triangles.shape}")
    pairs = set()
    for a, b, c in triangles:
        for i, j in ((a, b), (b, c), (a, c)):
            pairs.add((min(i, j), max(i, j)))
    edges = [
        (i, j, float(np.linalg.norm(points[i] - points[j])))
        for i, j in sorted(pairs)
    ]
    return WeightedGraph(points.shape[0], tuple(edges))

import numpy as np
import pytest

from concavematch import PointCloud, pairwise_euclidean


def euclidean_affinity(n, d, rng):
    return pairwise_euclidean(PointCloud(rng.standard_normal((n, d))))


def euclidean_pair(n, d, rng):
    return euclidean_affinity(n, d, rng), euclidean_affinity(n, d, rng)


def procrustes_residual(x, y):
    """Frobenius mismatch after optimal rigid alignment (incl. reflection)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    u, _, vt = np.linalg.svd(xc.T @ yc)
    return float(np.linalg.norm(xc @ (u @ vt) - yc))


def random_symmetric(n, rng, scale=1.0):
    g = rng.standard_normal((n, n)) * scale
    return 0.5 * (g + g.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

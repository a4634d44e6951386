"""Readers and writers for the on-disk formats.

Point clouds arrive as CSV (one point per row) or whitespace XYZ text,
graphs as ``i j w`` edge lists with 0-based indices, meshes as OFF, and
affinity/dissimilarity matrices as dense CSV. Parse failures raise
:class:`InputFormatError` so the CLI can map them to its input exit code.
"""

import csv
import io

import numpy as np

from .errors import InputFormatError
from .affinity import AffinityMatrix, PointCloud, WeightedGraph


def _strip_lines(text):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def load_point_cloud(path):
    """Point cloud from CSV (comma separated) or XYZ (whitespace) text."""
    try:
        text = _read(path)
        rows = []
        for line in _strip_lines(text):
            sep = "," if "," in line else None
            rows.append([float(tok) for tok in line.split(sep)])
        if not rows:
            raise ValueError("no points found")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise ValueError(f"inconsistent column counts {sorted(widths)}")
        return PointCloud(np.array(rows))
    except (ValueError, OSError) as exc:
        raise InputFormatError(f"cannot parse point cloud {path}: {exc}") from exc


def load_edge_list(path):
    """Weighted graph from 'i j w' lines; vertex count is max index + 1."""
    try:
        edges = []
        top = -1
        for line in _strip_lines(_read(path)):
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"expected 'i j w', got {line!r}")
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            top = max(top, i, j)
            edges.append((i, j, w))
        if not edges:
            raise ValueError("no edges found")
        return WeightedGraph(top + 1, tuple(edges))
    except (ValueError, OSError) as exc:
        raise InputFormatError(f"cannot parse edge list {path}: {exc}") from exc


def load_off_mesh(path):
    """Triangle mesh from an OFF file; returns (points, triangles)."""
    try:
        lines = list(_strip_lines(_read(path)))
        if not lines or lines[0] != "OFF":
            raise ValueError("missing OFF header")
        counts = lines[1].split()
        nv, nf = int(counts[0]), int(counts[1])
        if len(lines) < 2 + nv + nf:
            raise ValueError("truncated file")
        points = np.array(
            [[float(t) for t in lines[2 + i].split()[:3]] for i in range(nv)]
        )
        triangles = []
        for i in range(nf):
            parts = [int(t) for t in lines[2 + nv + i].split()]
            if parts[0] != 3:
                raise ValueError("only triangle faces are supported")
            triangles.append(parts[1:4])
        return points, np.array(triangles, dtype=int)
    except (ValueError, IndexError, OSError) as exc:
        raise InputFormatError(f"cannot parse OFF mesh {path}: {exc}") from exc


def save_off_mesh(path, points, triangles):
    points = np.asarray(points, dtype=float)
    triangles = np.asarray(triangles, dtype=int)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(points)} {len(triangles)} 0\n")
        for p in points:
            fh.write(" ".join(f"{c:.17g}" for c in p) + "\n")
        for t in triangles:
            fh.write("3 " + " ".join(str(int(i)) for i in t) + "\n")


def load_affinity_csv(path, provenance="distance"):
    """Dense square matrix from row-major CSV."""
    try:
        rows = []
        for line in _strip_lines(_read(path)):
            rows.append([float(tok) for tok in line.split(",")])
        matrix = np.array(rows)
        return AffinityMatrix(matrix, provenance)
    except (ValueError, OSError) as exc:
        raise InputFormatError(f"cannot parse affinity matrix {path}: {exc}") from exc


def save_matrix_csv(path, matrix):
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([f"{v:.17g}" for v in row])


def save_dissimilarity_csv(path, dissimilarity):
    """Dissimilarity matrix as CSV with a header row of labels."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dissimilarity.labels)
        for row in dissimilarity.values:
            writer.writerow([f"{v:.17g}" for v in row])


def load_dissimilarity_csv(path):
    from .pipeline import DissimilarityMatrix

    try:
        text = _read(path)
        reader = csv.reader(io.StringIO(text))
        rows = [row for row in reader if row]
        labels = tuple(rows[0])
        values = np.array([[float(tok) for tok in row] for row in rows[1:]])
        return DissimilarityMatrix(values, labels)
    except (ValueError, IndexError, OSError) as exc:
        raise InputFormatError(f"cannot parse dissimilarity {path}: {exc}") from exc


def save_embedding_csv(path, labels, coords):
    """Embedding as CSV rows of (label, coordinates...)."""
    coords = np.asarray(coords, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for label, row in zip(labels, coords):
            writer.writerow([label] + [f"{v:.17g}" for v in row])


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()

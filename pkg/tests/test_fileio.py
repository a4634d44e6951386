import numpy as np
import pytest

from concavematch import DissimilarityMatrix, fileio, random_sphere_mesh
from concavematch.errors import InputFormatError


def test_point_cloud_csv_and_xyz(tmp_path):
    pts = np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]])
    csv_path = tmp_path / "cloud.csv"
    np.savetxt(csv_path, pts, delimiter=",")
    np.testing.assert_allclose(fileio.load_point_cloud(csv_path).points, pts)
    xyz_path = tmp_path / "cloud.xyz"
    xyz_path.write_text("0 1 2\n3 4 5\n")
    np.testing.assert_allclose(fileio.load_point_cloud(xyz_path).points, pts)


def test_point_cloud_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(InputFormatError):
        fileio.load_point_cloud(path)
    path.write_text("a,b\n")
    with pytest.raises(InputFormatError):
        fileio.load_point_cloud(path)
    with pytest.raises(InputFormatError):
        fileio.load_point_cloud(tmp_path / "missing.csv")


def test_edge_list_round_trip(tmp_path):
    path = tmp_path / "graph.edges"
    path.write_text("# comment\n0 1 1.5\n1 2 2.0\n")
    graph = fileio.load_edge_list(path)
    assert graph.n == 3
    assert graph.edges == ((0, 1, 1.5), (1, 2, 2.0))
    path.write_text("0 1\n")
    with pytest.raises(InputFormatError):
        fileio.load_edge_list(path)


def test_off_mesh_round_trip(tmp_path):
    pts, tris = random_sphere_mesh(12, seed=0)
    path = tmp_path / "mesh.off"
    fileio.save_off_mesh(path, pts, tris)
    loaded_pts, loaded_tris = fileio.load_off_mesh(path)
    np.testing.assert_allclose(loaded_pts, pts, atol=1e-15)
    np.testing.assert_array_equal(loaded_tris, tris)
    path.write_text("NOT-OFF\n")
    with pytest.raises(InputFormatError):
        fileio.load_off_mesh(path)


def test_affinity_csv_round_trip(tmp_path):
    matrix = np.array([[0.0, 1.25], [1.25, 0.0]])
    path = tmp_path / "affinity.csv"
    fileio.save_matrix_csv(path, matrix)
    loaded = fileio.load_affinity_csv(path)
    np.testing.assert_allclose(loaded.values, matrix, atol=1e-15)
    assert loaded.is_distance


def test_dissimilarity_csv_round_trip(tmp_path):
    d = DissimilarityMatrix(
        np.array([[0.0, 2.0, 3.0], [2.0, 0.0, 4.0], [3.0, 4.0, 0.0]]),
        ("alpha", "beta", "gamma"),
    )
    path = tmp_path / "dissimilarity.csv"
    fileio.save_dissimilarity_csv(path, d)
    loaded = fileio.load_dissimilarity_csv(path)
    assert loaded.labels == d.labels
    np.testing.assert_allclose(loaded.values, d.values, atol=1e-15)


def test_embedding_csv(tmp_path):
    path = tmp_path / "embedding.csv"
    fileio.save_embedding_csv(path, ["a", "b"], np.array([[1.0, 2.0], [3.0, 4.0]]))
    rows = path.read_text().strip().splitlines()
    assert rows[0].split(",")[0] == "a"
    assert float(rows[1].split(",")[2]) == 4.0

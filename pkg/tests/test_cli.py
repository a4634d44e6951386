import json

import jsonschema
import numpy as np
import pytest

from concavematch import PointCloud, pairwise_euclidean
from concavematch.cli import main
from concavematch.schemas import SCHEMAS_BY_COMMAND


@pytest.fixture
def workdir(tmp_path, rng):
    pts = rng.standard_normal((7, 3))
    np.savetxt(tmp_path / "a.csv", pts, delimiter=",")
    theta = 0.4
    rot = np.array(
        [
            [np.cos(theta), -np.sin(theta), 0.0],
            [np.sin(theta), np.cos(theta), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    np.savetxt(tmp_path / "b.csv", pts @ rot.T, delimiter=",")
    np.savetxt(tmp_path / "c.csv", rng.standard_normal((7, 3)), delimiter=",")
    (tmp_path / "graph.edges").write_text("0 1 1.0\n1 2 1.0\n2 3 1.5\n3 0 0.5\n")
    return tmp_path


def load_and_validate(path, command):
    doc = json.loads(path.read_text(encoding="utf-8"))
    jsonschema.validate(doc, SCHEMAS_BY_COMMAND[command])
    return doc


def test_match_self_finds_identity_energy(workdir, capsys):
    out = workdir / "match.json"
    code = main(
        [
            "match",
            str(workdir / "a.csv"),
            "--restarts", "30", "--anchors", "1", "--seed", "0",
            "--out", str(out),
        ]
    )
    assert code == 0
    doc = load_and_validate(out, "match")
    pts = np.loadtxt(workdir / "a.csv", delimiter=",")
    expected = -float(np.sum(pairwise_euclidean(PointCloud(pts)).values ** 2))
    assert doc["result"]["energy"] == pytest.approx(expected, rel=1e-9)
    assert doc["result"]["is_vertex"] is True
    printed = capsys.readouterr().out
    assert "energy" in printed and "is_vertex" in printed


def test_match_deterministic_bytes(workdir):
    out1 = workdir / "m1.json"
    out2 = workdir / "m2.json"
    argv = ["match", str(workdir / "a.csv"), str(workdir / "b.csv"),
            "--seed", "7", "--restarts", "10", "--anchors", "1"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_match_energy_report_only_includes_E1(workdir):
    out = workdir / "match_e1.json"
    code = main(
        ["match", str(workdir / "a.csv"), str(workdir / "b.csv"),
         "--energy", "E1-report-only", "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "match")
    assert doc["energy_E1"] >= 0.0


def test_match_onesided(workdir):
    out = workdir / "match_os.json"
    code = main(
        ["match", str(workdir / "a.csv"), str(workdir / "c.csv"),
         "--energy", "onesided", "--polytope", "onesided",
         "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "match")
    assert doc["result"]["is_vertex"] is True


def test_match_exit_codes(workdir):
    bad = workdir / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["match", str(bad)]) == 2
    assert main(["match", str(workdir / "missing.csv")]) == 2
    assert main(["match", str(workdir / "a.csv"), "--energy", "onesided"]) == 1
    assert (
        main(["match", str(workdir / "a.csv"), str(workdir / "b.csv"),
              str(workdir / "c.csv")])
        == 1
    )


def test_concavity_check_euclidean(workdir, capsys):
    out = workdir / "check.json"
    code = main(
        ["concavity-check", str(workdir / "a.csv"), str(workdir / "c.csv"),
         "--samples", "20000", "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "concavity-check")
    pair = doc["pairs"][0]
    assert pair["certificate"] == "concave"
    assert pair["bound_report"]["chernoff_value"] == 0.0
    assert pair["bound_report"]["mc_hits"] == 0
    assert doc["aggregate"]["bound_mean"] == 0.0
    assert "concave" in capsys.readouterr().out


def test_concavity_check_squared_distance_positive_bound(workdir):
    out = workdir / "check_sq.json"
    code = main(
        ["concavity-check", str(workdir / "graph.edges"),
         "--affinity", "squared-distance",
         "--samples", "5000", "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "concavity-check")
    assert doc["pairs"][0]["bound_report"]["chernoff_value"] > 0.0


def test_concavity_check_csv_format(workdir):
    out = workdir / "check.csv"
    code = main(
        ["concavity-check", str(workdir / "a.csv"), str(workdir / "b.csv"),
         str(workdir / "c.csv"), "--samples", "2000", "--seed", "0",
         "--out", str(out), "--format", "csv"]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("a,b,certificate")
    assert len(lines) == 1 + 3 + 2  # header, three pairs, mean and std rows


def test_bound_command(workdir):
    out = workdir / "bound.json"
    code = main(
        ["bound", "--m", "90000", "--p", "0.49", "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "bound")
    assert 1e-5 <= doc["chernoff"] <= 2e-4
    assert doc["closed_form"] == pytest.approx(doc["chernoff"], rel=1e-9)


def test_match_csv_format(workdir):
    out = workdir / "match.csv"
    code = main(
        ["match", str(workdir / "a.csv"), str(workdir / "b.csv"),
         "--seed", "0", "--restarts", "5", "--anchors", "1",
         "--out", str(out), "--format", "csv"]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "source,target"
    assert len(lines) == 8  # header + 7 rows
    targets = sorted(int(line.split(",")[1]) for line in lines[1:])
    assert targets == list(range(7))


def test_bound_csv_format(workdir):
    out = workdir / "bound.csv"
    code = main(
        ["bound", "--m", "100", "--p", "0.3", "--samples", "1000",
         "--seed", "0", "--out", str(out), "--format", "csv"]
    )
    assert code == 0
    rows = dict(
        line.split(",", 1) for line in out.read_text().strip().splitlines()[1:]
    )
    assert float(rows["chernoff"]) == pytest.approx(float(rows["closed_form"]), rel=1e-9)
    assert "mc_estimate" in rows


def test_bound_command_with_mc(workdir):
    out = workdir / "bound_mc.json"
    code = main(
        ["bound", "--m", "30", "--p", "0.3", "--samples", "5000",
         "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "bound")
    assert doc["mc"]["mc_samples"] == 5000


def test_ensemble_command(workdir):
    out = workdir / "ens.json"
    code = main(
        ["ensemble", "--n", "5", "--p", "0.0", "--trials", "10",
         "--restarts", "2", "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "ensemble")
    assert doc["vertex_fraction"] == 1.0
    csv_lines = (workdir / "ens.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "key,value"
    assert any(line.startswith("vertex_fraction") for line in csv_lines)


def test_ensemble_schema_round_trip(workdir):
    out = workdir / "ens2.json"
    assert main(
        ["ensemble", "--n", "5", "--p", "0.2", "--trials", "5",
         "--seed", "3", "--out", str(out)]
    ) == 0
    doc = load_and_validate(out, "ensemble")
    total = doc["vertex_trials"] + sum(doc["face_dimension_histogram"].values())
    assert total == doc["trials"]


def test_dissimilarity_and_embed(workdir):
    diss = workdir / "diss.csv"
    code = main(
        ["dissimilarity", str(workdir / "a.csv"), str(workdir / "b.csv"),
         str(workdir / "c.csv"), "--restarts", "30", "--anchors", "1",
         "--seed", "0", "--out", str(diss)]
    )
    assert code == 0
    header = diss.read_text().splitlines()[0]
    assert header == "a,b,c"
    values = np.loadtxt(diss.read_text().splitlines()[1:], delimiter=",")
    scale = np.sum(
        pairwise_euclidean(
            PointCloud(np.loadtxt(workdir / "a.csv", delimiter=","))
        ).values
        ** 2
    )
    assert values[0, 1] < 1e-6 * scale < values[0, 2]

    emb = workdir / "emb.csv"
    figures = workdir / "figs"
    code = main(["embed", str(diss), "--k", "2", "--out", str(emb),
                 "--figures", str(figures)])
    assert code == 0
    rows = emb.read_text().strip().splitlines()
    assert len(rows) == 3 and rows[0].split(",")[0] == "a"
    assert (figures / "embedding.png").exists()


def test_dissimilarity_json_format(workdir):
    out = workdir / "diss.json"
    code = main(
        ["dissimilarity", str(workdir / "a.csv"), str(workdir / "b.csv"),
         "--restarts", "5", "--anchors", "1", "--seed", "0",
         "--out", str(out), "--format", "json"]
    )
    assert code == 0
    doc = load_and_validate(out, "dissimilarity")
    assert doc["labels"] == ["a", "b"]


def test_embed_json_format(workdir):
    diss = workdir / "d.csv"
    assert main(
        ["dissimilarity", str(workdir / "a.csv"), str(workdir / "b.csv"),
         "--restarts", "5", "--anchors", "1", "--seed", "0", "--out", str(diss)]
    ) == 0
    out = workdir / "emb.json"
    assert main(["embed", str(diss), "--k", "1", "--out", str(out),
                 "--format", "json"]) == 0
    doc = load_and_validate(out, "embed")
    assert len(doc["coordinates"][0]) == 1


def test_match_figures(workdir):
    figures = workdir / "figs"
    code = main(
        ["match", str(workdir / "a.csv"), str(workdir / "b.csv"),
         "--seed", "0", "--out", str(workdir / "m.json"),
         "--figures", str(figures)]
    )
    assert code == 0
    assert (figures / "match_trace.png").exists()


def test_mesh_input(workdir):
    from concavematch import fileio, random_sphere_mesh

    pts, tris = random_sphere_mesh(20, seed=1)
    mesh_path = workdir / "sphere.off"
    fileio.save_off_mesh(mesh_path, pts, tris)
    out = workdir / "mesh_check.json"
    code = main(
        ["concavity-check", str(mesh_path), "--samples", "2000",
         "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "concavity-check")
    assert doc["pairs"][0]["bound_report"]["mc_hits"] == 0


def test_unknown_input_extension(workdir):
    path = workdir / "data.weird"
    path.write_text("1,2\n")
    assert main(["match", str(path)]) == 1


def test_ensemble_and_dissimilarity_deterministic(workdir):
    for argv, out1, out2 in (
        (
            ["ensemble", "--n", "5", "--p", "0.2", "--trials", "5", "--seed", "4"],
            workdir / "e1.json",
            workdir / "e2.json",
        ),
        (
            ["dissimilarity", str(workdir / "a.csv"), str(workdir / "c.csv"),
             "--restarts", "5", "--anchors", "1", "--seed", "4"],
            workdir / "d1.csv",
            workdir / "d2.csv",
        ),
    ):
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


def test_match_linear_term(workdir):
    # a strong linear bias toward the identity assignment must win on a
    # zero quadratic part: use two identical clouds and a reward matrix
    n = 7
    reward = np.full((n, n), 10.0) - 20.0 * np.eye(n)
    np.savetxt(workdir / "linear.csv", reward, delimiter=",")
    out = workdir / "match_lin.json"
    code = main(
        ["match", str(workdir / "a.csv"), str(workdir / "a.csv"),
         "--linear-term", str(workdir / "linear.csv"),
         "--restarts", "20", "--anchors", "1", "--seed", "0",
         "--out", str(out)]
    )
    assert code == 0
    doc = load_and_validate(out, "match")
    assert doc["result"]["assignment"] == list(range(n))


def test_threads_env_default(monkeypatch):
    from concavematch.cli import _threads_default

    monkeypatch.setenv("CONCAVEMATCH_THREADS", "5")
    assert _threads_default() == 5
    monkeypatch.setenv("CONCAVEMATCH_THREADS", "junk")
    assert _threads_default() >= 1
    monkeypatch.delenv("CONCAVEMATCH_THREADS")
    assert _threads_default() >= 1

import json

import numpy as np
import pytest

from conftest import (FIG1_POLYLINE, cube_mesh, jittered_torus, open_grid,
                      torus_grid)
from quadspline.cli import count_sign_changes, main
from quadspline.mesh import save_obj


def write_points(path, pts):
    with open(path, "w", encoding="utf-8") as fh:
        for p in pts:
            fh.write(f"{p[0]} {p[1]}\n")


@pytest.fixture
def torus_obj(tmp_path):
    path = tmp_path / "torus.obj"
    save_obj(torus_grid(6, 6), path)
    return path


def test_build_happy_path(tmp_path, torus_obj):
    out = tmp_path / "surf.ply"
    rep = tmp_path / "surf.json"
    code = main(["build", str(torus_obj), "--family", "d5c2p2s4",
                 "--mode", "g2", "--param", "centripetal",
                 "--samples", "3", "--out", str(out), "--report", str(rep)])
    assert code == 0
    assert out.exists() and rep.exists()
    report = json.loads(rep.read_text())
    assert report["summary"]["position_gap"]["max"] < 1e-8
    header = out.read_text().splitlines()
    assert "property float mean_curvature" in header
    assert "property float isophote" in header


def test_build_usage_error_exit_2(torus_obj):
    code = main(["build", str(torus_obj), "--mode", "g2",
                 "--family", "d3c1p2s4"])
    assert code == 2


def test_build_mean_on_cube_exit_1(tmp_path):
    path = tmp_path / "cube.obj"
    save_obj(cube_mesh(), path)
    code = main(["build", str(path), "--param", "mean",
                 "--samples", "2"])
    assert code == 1


def test_build_missing_file_exit_1(tmp_path):
    code = main(["build", str(tmp_path / "nope.obj")])
    assert code == 1


def test_build_bad_flag_exit_2(torus_obj):
    code = main(["build", str(torus_obj), "--param", "bogus"])
    assert code == 2


def test_build_determinism(tmp_path, torus_obj):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.ply"
        rep = tmp_path / f"{tag}.json"
        assert main(["build", str(torus_obj), "--samples", "3",
                     "--out", str(out), "--report", str(rep)]) == 0
        outs.append((out.read_bytes(), rep.read_bytes()))
    assert outs[0][0] == outs[1][0]
    assert outs[0][1] == outs[1][1]


def test_build_config_file(tmp_path, torus_obj):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples": 2, "mode": "g1",
                               "family": "d3c1p2s4"}))
    out = tmp_path / "out.ply"
    code = main(["build", str(torus_obj), "--config", str(cfg),
                 "--out", str(out),
                 "--report", str(tmp_path / "r.json")])
    assert code == 0
    # flags win over config
    code = main(["build", str(torus_obj), "--config", str(cfg),
                 "--samples", "3", "--out", str(out),
                 "--report", str(tmp_path / "r.json")])
    assert code == 0
    cfg.write_text(json.dumps({"bogus_key": 1}))
    assert main(["build", str(torus_obj), "--config", str(cfg)]) == 2


def test_curve_square_symmetry(tmp_path):
    pts_file = tmp_path / "square.txt"
    write_points(pts_file, [(1, 0), (0, 1), (-1, 0), (0, -1)])
    code = main(["curve", str(pts_file), "--param", "centripetal",
                 "--samples", "40", "--out", str(tmp_path / "sq")])
    assert code == 0
    rows = (tmp_path / "sq.csv").read_text().splitlines()
    assert rows[0] == "x,px,py,curvature"
    assert len(rows) - 1 == 40
    data = np.array([[float(t) for t in r.split(",")] for r in rows[1:]])
    pts = data[:, 1:3]
    kappa = data[:, 3]
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    # 40 samples over 4 equal intervals: sample i + 10 is the quarter-turn
    # image of sample i, and the curvature profile repeats
    for i in range(10):
        assert np.allclose(rot @ pts[i], pts[i + 10], atol=1e-12)
        assert kappa[i] == pytest.approx(kappa[i + 10], abs=1e-9)
    assert (tmp_path / "sq.svg").exists()


def test_curve_too_few_points_is_usage_error(tmp_path):
    pts_file = tmp_path / "two.txt"
    write_points(pts_file, [(0, 0), (1, 0)])
    assert main(["curve", str(pts_file)]) == 2


def test_curve_centripetal_no_worse_than_uniform(tmp_path):
    pts_file = tmp_path / "fig1.txt"
    write_points(pts_file, FIG1_POLYLINE)
    counts = {}
    for param in ("uniform", "centripetal"):
        out = tmp_path / param
        assert main(["curve", str(pts_file), "--param", param,
                     "--samples", "400", "--out", str(out)]) == 0
        rows = (out.with_suffix(".csv")).read_text().splitlines()[1:]
        kappa = [float(r.split(",")[3]) for r in rows]
        counts[param] = count_sign_changes(kappa)
    assert counts["centripetal"] <= counts["uniform"]
    assert counts["centripetal"] < counts["uniform"]  # strict on this data


def test_compare_uniform_grid_surfaces_coincide(tmp_path):
    path = tmp_path / "grid.obj"
    save_obj(open_grid(4, 4), path)
    code = main(["compare", str(path), "--samples", "3",
                 "--out", str(tmp_path / "cmp")])
    assert code == 0
    results = json.loads((tmp_path / "cmp.compare.json").read_text())
    assert results["position_delta"]["max"] < 1e-10
    assert set(results["augmented"]) == {"section_sign_changes",
                                         "continuity", "mean_curvature"}


def test_compare_rejects_extraordinary(tmp_path):
    path = tmp_path / "cube.obj"
    save_obj(cube_mesh(), path)
    assert main(["compare", str(path)]) == 1


def test_compare_uneven_torus_wiggle_ordering(tmp_path):
    path = tmp_path / "jt.obj"
    save_obj(jittered_torus(), path)
    code = main(["compare", str(path), "--samples", "2",
                 "--out", str(tmp_path / "jt")])
    assert code == 0
    results = json.loads((tmp_path / "jt.compare.json").read_text())
    aug = results["augmented"]["section_sign_changes"]
    mean = results["mean"]["section_sign_changes"]
    assert aug <= mean
    assert aug < mean  # strict on this mesh
    assert results["augmented"]["continuity"]["position_gap"]["max"] < 1e-8
    assert results["mean"]["continuity"]["position_gap"]["max"] < 1e-8
    assert (tmp_path / "jt.augmented.ply").exists()
    assert (tmp_path / "jt.mean.ply").exists()


def test_count_sign_changes():
    assert count_sign_changes([1.0, 2.0, -1.0, 3.0]) == 2
    assert count_sign_changes([1.0, 1e-15, -1.0]) == 1
    assert count_sign_changes([0.0, 0.0]) == 0
    assert count_sign_changes([1.0, 1.0]) == 0

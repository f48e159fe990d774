import hashlib
import json
import os
import stat
import subprocess
import sys

import numpy as np
import pytest

from soapfilm.cli import main
from soapfilm.graph import dump_graph
from soapfilm.meshio import read_obj, read_ply
from soapfilm.shapes import cube_cell, synthetic_lattice


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def cube_json(tmp_path):
    p = tmp_path / "cube.json"
    p.write_bytes(dump_graph(cube_cell()))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_build_outputs_census(tmp_path, cube_json, capsys):
    out = tmp_path / "cube.obj"
    code, stdout, _ = run(capsys, "build", cube_json, "-o", out, "--iters", 1, "--threads", 1,
                          "--timings", tmp_path / "t.csv")
    assert code == 0
    doc = json.loads(stdout)
    assert doc["census"] == {"cylindrical": 12, "subdivision": 8, "boundary_curves": 24,
                             "planar_caps": 0}
    v, f = read_obj(out)
    assert len(f) > 0
    assert (tmp_path / "t.csv").read_text().startswith("node,degree")
    umask = os.umask(0)
    os.umask(umask)
    assert stat.S_IMODE(out.stat().st_mode) == 0o666 & ~umask


def test_build_rerun_byte_identical(tmp_path, cube_json, capsys):
    hashes = []
    for k in range(2):
        out = tmp_path / f"r{k}.stl"
        assert run(capsys, "build", cube_json, "-o", out, "--iters", 1, "--format", "stl_binary")[0] == 0
        hashes.append(sha(out))
    assert hashes[0] == hashes[1]


def test_stream_matches_memory_topology(tmp_path, cube_json, capsys):
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    assert run(capsys, "build", cube_json, "-o", a, "--iters", 1)[0] == 0
    assert run(capsys, "build", cube_json, "-o", b, "--iters", 1, "--stream")[0] == 0
    va, fa = read_obj(a)
    vb, fb = read_obj(b)
    assert np.array_equal(va, vb) and np.array_equal(fa, fb)


def test_threads_byte_identical(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_bytes(dump_graph(synthetic_lattice(2, 2, 2, seed=5)))
    outs = []
    for t in (1, 2):
        o = tmp_path / f"t{t}.obj"
        assert run(capsys, "build", g, "-o", o, "--iters", 1, "--threads", t)[0] == 0
        outs.append(sha(o))
    assert outs[0] == outs[1]


def test_dumps(tmp_path, cube_json, capsys):
    out = tmp_path / "d.obj"
    code, _, _ = run(capsys, "build", cube_json, "-o", out, "--iters", 2, "--dump-cuts",
                     "--dump-film", "--dump-faired", "--dump-subdiv", 1)
    assert code == 0
    d = tmp_path / "d.dumps"
    names = sorted(p.name for p in d.iterdir())
    assert len(names) == 8 * 4
    cuts = json.loads((d / "node_0_cuts.json").read_text())
    assert len(cuts) == 3


def test_graph_error_exit_1_no_partial(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes": [{"id": 0, "x": 0, "y": 0, "z": 0}], "edges": [{"id": 0, "a": 0, "b": 7}]}')
    out = tmp_path / "bad.obj"
    code, _, err = run(capsys, "build", bad, "-o", out)
    assert code == 1
    assert json.loads(err)["error"]
    assert sorted(os.listdir(tmp_path)) == ["bad.json"]


def test_parse_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "x.json"
    bad.write_text("{nope")
    assert run(capsys, "build", bad)[0] == 1


def test_cut_error_exit_1(tmp_path, capsys):
    g = tmp_path / "short.json"
    g.write_text(json.dumps({"nodes": [{"id": i, "x": x, "y": y, "z": 0} for i, (x, y) in
                                       enumerate([(0, 0), (1.5, 0), (0, 5), (1.5, 5)])],
                             "edges": [{"id": 0, "a": 0, "b": 1}, {"id": 1, "a": 0, "b": 2},
                                       {"id": 2, "a": 1, "b": 3}]}))
    code, _, err = run(capsys, "build", g, "-o", tmp_path / "s.obj")
    assert code == 1 and json.loads(err)["error"] == "invalid-cut"
    assert not (tmp_path / "s.obj").exists()


def test_config_precedence_and_errors(tmp_path, cube_json, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda": 0.45, "format": "ply"}))
    out = tmp_path / "p"
    code, stdout, _ = run(capsys, "build", cube_json, "--config", cfg, "--format", "obj",
                          "-o", str(out) + ".obj", "--iters", 0)
    assert code == 0 and json.loads(stdout)["output"].endswith(".obj")
    assert run(capsys, "build", cube_json, "--lambda", 0.7)[0] == 1
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "build", cube_json, "--config", cfg)[0] == 1


def test_node_and_analyze(tmp_path, capsys):
    out = tmp_path / "r6.obj"
    code, stdout, _ = run(capsys, "node", "regular6", "-o", out, "--samples", 20000)
    assert code == 0
    doc = json.loads(stdout)
    assert doc["valence"] == 6 and doc["deviation"]["samples"] == 20000
    assert (tmp_path / "r6.deviation.csv").exists()
    stem = tmp_path / "an"
    code, stdout, _ = run(capsys, "analyze", out, "-o", stem)
    assert code == 0
    v, f, sc = read_ply(str(stem) + ".curvature.ply")
    assert "curvature" in sc and len(sc["curvature"]) == len(v)
    stem2 = tmp_path / "an2"
    code, stdout, _ = run(capsys, "analyze", "regular6", "-o", stem2, "--samples", 20000)
    assert code == 0 and json.loads(stdout)["deviation"]["samples"] == 20000
    text = (tmp_path / "an2.analysis.csv").read_text().splitlines()
    assert text[0].startswith("model,quantity") and len(text) == 3


def test_node_direction_file(tmp_path, capsys):
    d = tmp_path / "tri.txt"
    d.write_text("1 0 0\n0 1 0\n0 0 1\n")
    code, stdout, _ = run(capsys, "node", d, "-o", tmp_path / "tri.ply", "--format", "ply",
                          "--samples", 5000)
    assert code == 0 and json.loads(stdout)["valence"] == 3
    d.write_text("1 0 0\n")
    assert run(capsys, "node", d)[0] == 1


def test_console_script(tmp_path, cube_json):
    proc = subprocess.run([sys.executable, "-m", "soapfilm.cli", "build", str(cube_json), "-o",
                           str(tmp_path / "s.obj"), "--iters", "0"], capture_output=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["census"]["subdivision"] == 8

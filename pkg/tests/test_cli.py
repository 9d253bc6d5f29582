import json
import subprocess
import sys

import numpy as np
import pytest

from metriconv.cli import main
from metriconv.imaging import GrayImage, read_image, write_image


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, [json.loads(line) for line in out.splitlines() if line]


@pytest.fixture
def grid5(tmp_path):
    path = tmp_path / "grid5.json"
    path.write_text(json.dumps({"kind": "grid", "width": 5, "height": 5, "p": "inf"}))
    return str(path)


@pytest.fixture
def gauss(tmp_path):
    path = tmp_path / "gauss.json"
    path.write_text(json.dumps({"stencil": "gaussian3x3"}))
    return str(path)


def test_reproduce_tinyballs(capsys):
    code, lines = run(capsys, "reproduce", "tinyballs")
    assert code == 0
    assert lines[0]["norm_in"] == 0 and lines[0]["norm_out"] == 1 and lines[0]["adapted"] is False
    assert lines[-1] == {"summary": {"checks": 1, "failed": 0}}


def test_reproduce_bigballs(capsys):
    code, lines = run(capsys, "reproduce", "bigballs", "--n", "5", "--p", "2")
    assert code == 0 and lines[0]["pass"] and len(lines[0]["rows"]) == 5


def test_e_constant(capsys, grid5):
    code, lines = run(capsys, "e-constant", "--space", grid5)
    assert code == 0 and lines[0]["E"] == 4 and len(lines[0]["witness"]["centers"]) == 4
    code, lines = run(capsys, "e-constant", "--space", grid5, "--kind", "open")
    assert lines[0]["E"] == 4


def test_adaptedness(capsys, grid5, gauss):
    code, lines = run(capsys, "adaptedness", "--space", grid5, "--filter", gauss)
    assert code == 0 and lines[0]["M"] == 0.25 and lines[0]["adapted"]


def test_opnorm_p3_consistent(capsys, grid5):
    code, lines = run(capsys, "opnorm", "--space", grid5, "--op", "avg", "--p", "3", "--r", "1")
    assert code == 0
    assert lines[0]["lhs_kind"] == "lower-bound" and lines[0]["status"] == "consistent"


def test_opnorm_filter(capsys, grid5, gauss):
    code, lines = run(capsys, "opnorm", "--space", grid5, "--op", "filter", "--filter", gauss, "--p", "inf")
    assert code == 0 and lines[0]["status"] == "certified"


def test_certify_all_radii(capsys, grid5):
    code, lines = run(capsys, "certify", "--space", grid5, "--p", "1")
    assert code == 0
    reports = lines[:-1]
    assert len(reports) == 2 * 4 and all(r["passed"] for r in reports)
    assert lines[-1]["summary"] == {"checks": 8, "failed": 0}


def test_certify_non_adapted_filter_exits_one(capsys, tmp_path):
    space = tmp_path / "t.json"
    space.write_text(json.dumps({"kind": "tinyballs"}))
    filt = tmp_path / "f.json"
    filt.write_text(json.dumps({"explicit": {"radius": 1, "kind": "closed",
                                             "measures": {"0": [[0, 1], [1, 1]], "1": [[0, 1], [1, 1]]}}}))
    code, lines = run(capsys, "certify", "--space", str(space), "--filter", str(filt), "--p", "1")
    assert lines[0]["status"] == "skipped"
    assert code == 0


def test_lemmas(capsys, grid5, gauss):
    code, lines = run(capsys, "lemmas", "--space", grid5, "--filter", gauss)
    assert code == 0
    claims = [l.get("claim") for l in lines[:-1]]
    assert claims.count("variation") == 25 and "pointwise" in claims and "open-closed" in claims


def test_convolve_image(capsys, tmp_path):
    src = tmp_path / "in.pgm"
    dst = tmp_path / "out.pgm"
    src.write_bytes(write_image(GrayImage(np.full((3, 3), 255, dtype=np.uint8))))
    code, lines = run(capsys, "convolve-image", "--in", str(src), "--stencil", "box:1", "--out", str(dst))
    assert code == 0 and lines[0]["passed"]
    assert (read_image(dst.read_bytes()).pixels == 255).all()


def test_convolve_image_no_clamp_unrepresentable(capsys, tmp_path):
    src = tmp_path / "in.pgm"
    src.write_bytes(write_image(GrayImage(np.full((3, 3), 255, dtype=np.uint8))))
    code, _ = run(capsys, "convolve-image", "--in", str(src), "--stencil", "box:1",
                  "--out", str(tmp_path / "o.pgm"), "--no-clamp")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["e-constant"],
    ["frobnicate"],
    ["e-constant", "--space", "/does/not/exist.json"],
    ["opnorm", "--space", "x.json", "--op", "avg", "--p", "0.5", "--r", "1"],
])
def test_usage_errors_exit_two(capsys, argv):
    assert main(argv) == 2


def test_bad_space_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"kind": "matrix", "distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    assert main(["e-constant", "--space", str(path)]) == 2
    assert "triangle" in capsys.readouterr().err


def test_output_file_and_determinism(tmp_path, grid5):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        assert main(["--output", str(out), "certify", "--space", grid5, "--p", "3",
                     "--trials", "20", "--seed", "7"]) == 0
    assert a.read_bytes() == b.read_bytes() and a.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "metriconv", "reproduce", "tinyballs"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout.splitlines()[0])["norm_out"] == 1

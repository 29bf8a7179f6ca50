import json
import shutil
import subprocess

import pytest

from qrsk.cli import main, to_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def matrix_file(tmp_path):
    def make(obj):
        p = tmp_path / "m.json"
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return make


def test_qrsk_single_entry(capsys, matrix_file):
    code, out, _ = run(capsys, "qrsk", matrix_file([[3]]), "--q", "0.5")
    rep = json.loads(out)
    assert code == 0
    assert rep["p_pattern"] == [[3]] and rep["q_pattern"] == [[3]] and rep["shape"] == [3]


def test_qrsk_at_q_zero_ignores_seed(capsys, matrix_file):
    path = matrix_file([[1, 2], [2, 0], [1, 1]])
    outs = {json.dumps(json.loads(run(capsys, "qrsk", path, "--q", "0", "--seed", str(s))[1])["p_pattern"])
            for s in range(4)}
    assert len(outs) == 1


@pytest.mark.parametrize("content", ["not json", [[1, 2], [3]], [[1, -1]], {"a": 1}])
def test_qrsk_bad_matrix(capsys, matrix_file, content):
    code, _, err = run(capsys, "qrsk", matrix_file(content))
    assert code == 2 and "error" in err


def test_qrsk_missing_file(capsys, tmp_path):
    assert run(capsys, "qrsk", str(tmp_path / "nope.json"))[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "polymer", "--q", "1.5")[0] == 2
    assert run(capsys, "polymer", "--size", "abc")[0] == 2
    assert run(capsys, "verify", "burke", "--alpha", "1.2", "--beta", "0.3")[0] == 2
    assert run(capsys, "verify", "burke")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_verify_burke_passes(capsys):
    code, out, _ = run(capsys, "verify", "burke", "--alpha", "0.3", "--beta", "0.5", "--q", "0.2,0.8")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] is True and len(rep["checks"]) == 2


def test_verify_identities_and_failure_exit(capsys):
    code, out, _ = run(capsys, "verify", "identities", "--reps", "60")
    assert code == 0 and json.loads(out)["tuples"] == 60
    code, out, _ = run(capsys, "verify", "identities", "--reps", "60", "--tol", "0")
    assert code == 1 and json.loads(out)["pass"] is False


def test_verify_identities_parallel_matches_serial(capsys):
    a = json.loads(run(capsys, "verify", "identities", "--reps", "20")[1])
    b = json.loads(run(capsys, "verify", "identities", "--reps", "20", "--jobs", "2")[1])
    assert a["max_deviation"] == b["max_deviation"]


def test_verify_symmetry_default_grid(capsys):
    code, out, _ = run(capsys, "verify", "symmetry")
    rep = json.loads(out)
    assert code == 0 and rep["checks"] == 48 and rep["max_tv"] < 1e-10


@pytest.mark.parametrize("suite", ["localmoves", "lmpush", "whittaker"])
def test_verify_other_suites(capsys, suite):
    code, out, _ = run(capsys, "verify", suite, "--cap", "3")
    assert code == 0 and json.loads(out)["pass"] is True


def test_polymer_outputs(capsys):
    code, out, _ = run(capsys, "polymer", "--size", "0")
    assert code == 0 and json.loads(out)["Z"] == 0
    code, out, _ = run(capsys, "polymer", "--size", "3,2", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "l,j,Z" and len(lines) == 1 + 4 * 3


def test_pushtasep_csv_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(capsys, "pushtasep", "--size", "3,6", "--seed", "8", "--format", "csv", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "time,particle,position"


def test_png_unit_droplets_hand_heights(capsys):
    code, out, _ = run(capsys, "png", "--droplets", "unit", "--q", "0", "--size", "3")
    heights = json.loads(out)["heights"]
    assert code == 0
    assert heights == {"0,-2": 3, "0,-1": 2, "0,0": 3, "0,1": 2, "0,2": 3, "1,0": 1}


def test_json_floats_keep_full_precision():
    assert to_json({"x": 0.1 + 0.2}) == '{"x": 0.30000000000000004}'


@pytest.mark.skipif(shutil.which("qrsk") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["qrsk", "verify", "burke", "--alpha", "0.3", "--beta", "0.3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["pass"] is True

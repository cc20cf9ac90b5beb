import json
import subprocess
import sys

import pytest

from hslab.cli import main
from hslab.params import ProblemParams, best_constant


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_constant_prints_json(capsys):
    out = run_json(capsys, ["constant", "--N", "4", "--gamma", "0.5", "--s", "1.0"])
    assert out["mu"] == pytest.approx(best_constant(ProblemParams(4, 0.5, 1.0)), rel=1e-15)
    assert out["run_config"]["command"] == "constant"


def test_spectrum_file_has_expected_ratio(tmp_path):
    path = tmp_path / "spectrum.json"
    assert main(["spectrum", "--N", "3", "--gamma", "0.1", "--s", "0.5", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    p = ProblemParams(3, 0.1, 0.5)
    assert data["eta2_over_eta1"] == pytest.approx(p.p - 1, rel=1e-6)


def test_deficit_of_manifold_point_vanishes(capsys):
    out = run_json(capsys, ["deficit", "--N", "4", "--gamma", "0.5", "--s", "1.0",
                            "--bubble", "--lambda", "2", "--coeff", "1.5"])
    assert abs(out["deficit"]) < 1e-9 * out["gamma_norm_sq"]


def test_distance_from_csv(tmp_path, capsys):
    src = tmp_path / "u.csv"
    from hslab.bubble import Bubble, write_bubble_csv

    write_bubble_csv(Bubble(ProblemParams(4, 0.5, 1.0), 3.0, 0.5), src, h=0.01)
    out = run_json(capsys, ["distance", "--N", "4", "--gamma", "0.5", "--s", "1.0",
                            "--input", str(src)])
    assert out["lambda"] == pytest.approx(3.0, rel=1e-7)
    assert out["c"] == pytest.approx(0.5, rel=1e-7)


def test_directory_output_naming(tmp_path):
    d = tmp_path / "runs"
    assert main(["interaction-scan", "--N", "3", "--gamma", "0.1", "--s", "0.5",
                 "--n-points", "8", "--out", str(d)]) == 0
    names = sorted(x.name for x in d.iterdir())
    assert names == ["interaction-scan_3_0.1_0.5.csv", "interaction-scan_3_0.1_0.5.json"]
    first = (d / names[0]).read_text().splitlines()[0]
    assert first.startswith("# run_config=")


def test_fit_bubbles(capsys):
    out = run_json(capsys, ["fit-bubbles", "--N", "4", "--gamma", "0.5", "--s", "1.0",
                            "--lambdas", "1", "0.001", "--nu", "2"])
    lams = sorted(b["lambda"] for b in out["bubbles"])
    assert lams[0] == pytest.approx(1e-3, rel=0.01) and lams[1] == pytest.approx(1.0, rel=0.01)


@pytest.mark.parametrize("argv", [
    ["constant", "--N", "3", "--gamma", "0.3", "--s", "0.5"],
    ["constant", "--N", "3", "--gamma", "0.1", "--s", "2.5"],
    ["deficit", "--N", "3", "--gamma", "0.1", "--s", "0.5", "--input", "/nonexistent.csv"],
    ["stability-scan", "--N", "3", "--gamma", "0.1", "--s", "0.5", "--d-grid", "0.01", "0.02"],
    ["bogus"],
    [],
])
def test_validation_exit_code(argv, capsys):
    assert main(argv) == 2


def test_accuracy_exit_code(capsys):
    argv = ["spectrum", "--N", "3", "--gamma", "0.1", "--s", "0.5",
            "--grid-n", "512", "--t-window", "-0.5", "0.5", "--tol", "1e-12"]
    assert main(argv) == 3
    assert "accuracy" in capsys.readouterr().err


def test_reference_mode_unlocks_endpoints(capsys):
    assert main(["constant", "--N", "3", "--gamma", "0", "--s", "0"]) == 2
    out = run_json(capsys, ["constant", "--N", "3", "--gamma", "0", "--s", "0", "--reference-mode"])
    assert out["mu"] > 0


def test_byte_identical_reruns(tmp_path):
    argv = ["stability-scan", "--N", "4", "--gamma", "0.5", "--s", "1.0",
            "--kind", "random_orthogonal", "--n-random", "2", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a), "--threads", "1"]) == 0
    assert main(argv + ["--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hslab", "constant", "--N", "3",
                          "--gamma", "0.1", "--s", "0.5"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "mu" in json.loads(res.stdout)

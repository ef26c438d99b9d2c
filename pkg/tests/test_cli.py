import csv
import io

import numpy as np
import pytest

from wavedr.cli import main
from wavedr.estimators import EstimatorConfig, lambda_hat, whiten, write_sample_csv
from wavedr.simulation import generate
from wavedr.wavelets import build_wavelet


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture
def sample_csv(tmp_path):
    s = generate(1, 500, 77)
    path = tmp_path / "sample.csv"
    with open(path, "w") as fh:
        write_sample_csv(s, fh)
    return s, path


def test_estimate_prints_eigenvalues_and_direction(sample_csv, tmp_path):
    s, path = sample_csv
    code, text = run(["estimate", str(path), "-o", str(tmp_path / "e.csv")])
    assert code == 0
    eig_line = next(l for l in text.splitlines() if l.startswith("eigenvalues:"))
    assert len(eig_line.split()[1:]) == 5
    assert sum(l.startswith("beta_") for l in text.splitlines()) == 1
    with open(tmp_path / "e.csv") as fh:
        rows = list(csv.DictReader(fh))
    lam = np.zeros((5, 5))
    for r in rows:
        if r["kind"] == "lambda":
            lam[int(r["j"]) - 1, int(r["k"]) - 1] = float(r["value"])
    ws, _ = whiten(s)
    ref = lambda_hat(ws, EstimatorConfig(0, 0.01, build_wavelet("haar"))).m
    assert np.max(np.abs(lam - ref)) <= 1e-12
    assert sum(r["kind"] == "direction" for r in rows) == 5


def test_estimate_without_whitening_matches_library(sample_csv, tmp_path):
    s, path = sample_csv
    code, _ = run(["estimate", str(path), "--method", "wavelet-d", "--no-whiten", "--n-dirs", "2",
                   "-o", str(tmp_path / "e.csv")])
    assert code == 0
    with open(tmp_path / "e.csv") as fh:
        vals = [float(r["value"]) for r in csv.DictReader(fh) if r["kind"] == "lambda"]
    ref = lambda_hat(s, EstimatorConfig(0, 0.01, build_wavelet("daubechies2"))).m
    assert np.max(np.abs(np.array(vals).reshape(5, 5) - ref)) <= 1e-12


def test_empty_and_malformed_input(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run(["estimate", str(empty)])[0] == 2
    assert "no observations" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("y,x1,x2\n1,2,3\n4,five,6\n")
    assert run(["estimate", str(bad)])[0] == 2
    assert "line 3" in capsys.readouterr().err
    assert run(["estimate", str(tmp_path / "missing.csv")])[0] == 2


def test_invalid_flags_rejected_before_reading(tmp_path, capsys):
    missing = str(tmp_path / "never_read.csv")
    assert run(["estimate", missing, "--method", "sir", "--jn", "2"])[0] == 2
    assert "--jn" in capsys.readouterr().err
    assert run(["estimate", missing, "--method", "lasso"])[0] == 2
    assert run(["simulate", "--model", "1", "--method", "sir", "--bandwidth", "0.3"])[0] == 2
    assert run(["simulate", "--model", "1", "--plot-script", "p.py"])[0] == 2
    with pytest.raises(SystemExit) as exc:
        run(["simulate", "--model", "1", "--n", "-5"])
    assert exc.value.code == 2


def test_simulate_is_reproducible(tmp_path):
    args = ["simulate", "--model", "2", "--method", "wavelet-h", "--n", "100", "--reps", "4", "--seed", "3"]
    assert run(args + ["-o", str(tmp_path / "a.csv")])[0] == 0
    assert run(args + ["-o", str(tmp_path / "b.csv"), "--threads", "2"])[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_table2_small_run(tmp_path):
    out = tmp_path / "t2.csv"
    code, text = run(["table2", "--n", "80", "--reps", "2", "--seed", "1", "-o", str(out),
                      "--boxplot", str(tmp_path / "box.csv"), "--plot-script", str(tmp_path / "plot.py")])
    assert code == 0
    assert len(text.strip().splitlines()) == 12
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len({(r["model"], r["method"]) for r in rows}) == 12
    assert (tmp_path / "plot.py").exists()


def test_table1_sir_row(tmp_path):
    code, text = run(["table1", "--n", "500", "--reps", "30", "--seed", "42", "-o", str(tmp_path / "t1.csv")])
    assert code == 0
    row = next(l for l in text.splitlines() if l.startswith("SIR"))
    means = [float(tok) for tok in row.split()[1::2]]
    assert len(means) == 5
    assert np.allclose(means, [1, 1, 1, 1, 0], atol=0.05)


def test_diagnostics(tmp_path):
    code, text = run(["diagnostics", "--wavelet", "haar", "--probes", "0.5", "0.2", "-o", str(tmp_path / "d.csv")])
    assert code == 0 and len(text.splitlines()) == 3
    assert run(["diagnostics", "--wavelet", "coiflet"])[0] == 2


@pytest.mark.parametrize("cmd", ["estimate", "simulate", "table1", "table2", "diagnostics"])
def test_help(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out

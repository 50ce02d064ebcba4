import json
import subprocess
import sys

import numpy as np
import pytest

from hutchfrac.cli import main
from hutchfrac.io import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_attractor_sierpinski(capsys, tmp_path):
    csv = tmp_path / "s.csv"
    code, out, _ = run(capsys, "attractor", "corpus:sierpinski", "--tol", "1e-5",
                       "--out-csv", str(csv))
    assert code == 0
    assert json.loads(out)["converged"] is True
    assert len(read_csv(csv)) >= 3 ** 7


def test_attractor_fg_fills_interval(capsys, tmp_path):
    csv = tmp_path / "fg.csv"
    code, out, _ = run(capsys, "attractor", "corpus:fg_interval", "--out-csv", str(csv))
    assert code == 0 and json.loads(out)["converged"] is True
    x = np.sort(read_csv(csv)[:, 0])
    grid = np.linspace(0, 2, 201)
    assert x.min() == 0 and x.max() == 2
    assert np.abs(grid[:, None] - x[None, :]).min(axis=1).max() <= 0.02


def test_attractor_nonconvergence_exit(capsys):
    code, out, _ = run(capsys, "attractor", "corpus:edelstein_exp@20", "--max-iter", "20")
    assert code == 3 and json.loads(out)["converged"] is False


def test_invalid_json_exit(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, out, err = run(capsys, "classify", str(bad))
    assert code == 2 and out == "" and "invalid JSON" in err


def test_unknown_corpus_and_bad_args(capsys):
    assert run(capsys, "classify", "corpus:menger")[0] == 2
    assert run(capsys, "classify")[0] == 2
    assert run(capsys, "--threads", "zero", "classify", "corpus:cantor")[0] == 2


def test_classify_fg_report(capsys, tmp_path):
    rj = tmp_path / "r.json"
    code, out, _ = run(capsys, "classify", "corpus:fg_interval", "--report-json", str(rj))
    assert code == 0 and "eventual=refuted" in out
    doc = json.loads(rj.read_text())
    ev = doc["report"]["metrics"][0]["verdicts"]["eventual"]
    assert ev["status"] == "refuted" and ev["witness"]["word_label"].startswith("fg")
    assert [s["report"]["metrics"][0]["verdicts"]["eventual"]["status"]
            for s in doc["subsystems"]] == ["verified", "verified"]


def test_classify_sierpinski_and_edelstein(capsys):
    code, out, _ = run(capsys, "classify", "corpus:sierpinski")
    banach = json.loads(out)["report"]["metrics"][0]["verdicts"]["banach"]
    assert code == 0 and banach["status"] == "verified"
    assert banach["certificate"]["lambda"] == 0.5
    code, out, _ = run(capsys, "classify", "corpus:edelstein_exp")
    rep = json.loads(out)["report"]
    assert rep["metrics"][0]["verdicts"]["edelstein"]["status"] == "verified"
    assert rep["metrics"][0]["verdicts"]["banach"]["status"] == "verified"
    assert any("box" in n for n in rep["notes"])


def test_classify_report_is_byte_stable(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "--seed", "3", "classify", "corpus:cantor", "--report-json", str(a))
    run(capsys, "--seed", "3", "classify", "corpus:cantor", "--report-json", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_remetrize_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "remetrize", "corpus:sierpinski", "--verify", "edelstein")
    assert code == 0 and json.loads(out)["result"]["violations"] == 0
    code, out, _ = run(capsys, "remetrize", "corpus:swap_halve", "--verify", "banach-power")
    assert code == 0 and json.loads(out)["result"]["max_ratio"] <= 1 / 1.2 + 1e-6
    rj = tmp_path / "fg.json"
    code, _, err = run(capsys, "remetrize", "corpus:fg_interval", "--report-json", str(rj))
    assert code == 4 and "fg" in err
    assert json.loads(rj.read_text())["word"].startswith("fg")


def test_remetrize_banach_power_refused(capsys):
    code, _, err = run(capsys, "remetrize", "corpus:swap_halve", "--verify", "banach-power",
                       "--a", "1.5")
    assert code == 4 and "remetrization failed" in err


def test_export_and_reload(capsys, tmp_path):
    path = tmp_path / "cantor.json"
    assert run(capsys, "export", "cantor", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "attractor", str(path), "--tol", "1e-4")
    assert code == 0 and json.loads(out)["name"] == "cantor"


def test_chaos_and_figures(capsys, tmp_path):
    png = tmp_path / "c.png"
    code, out, _ = run(capsys, "chaos", "corpus:sierpinski", "--iterations", "3000",
                       "--figure", str(png))
    assert code == 0 and json.loads(out)["points"] == 3000 - 100
    assert png.read_bytes()[:4] == b"\x89PNG"
    vg = tmp_path / "v.png"
    assert run(capsys, "classify", "corpus:cantor", "--figure", str(vg))[0] == 0
    assert vg.stat().st_size > 0
    ag = tmp_path / "a.png"
    assert run(capsys, "attractor", "corpus:cantor", "--figure", str(ag))[0] == 0
    assert ag.stat().st_size > 0


def test_chaos_start_dimension_checked(capsys):
    assert run(capsys, "chaos", "corpus:sierpinski", "--start", "0.1")[0] == 2


def test_same_seed_same_bytes(capsys, tmp_path):
    outs = []
    for k in range(2):
        csv, ppm = tmp_path / f"{k}.csv", tmp_path / f"{k}.ppm"
        run(capsys, "--seed", "9", "chaos", "corpus:cantor", "--iterations", "5000",
            "--out-csv", str(csv), "--render-ppm", str(ppm), "--width", "64", "--height", "8")
        outs.append((csv.read_bytes(), ppm.read_bytes()))
    assert outs[0] == outs[1]
    run(capsys, "--seed", "10", "chaos", "corpus:cantor", "--iterations", "5000",
        "--out-csv", str(tmp_path / "x.csv"))
    assert (tmp_path / "x.csv").read_bytes() != outs[0][0]


def test_threads_env_override(capsys, monkeypatch):
    monkeypatch.setenv("HUTCHFRAC_THREADS", "2")
    assert run(capsys, "--threads", "bogus", "classify", "corpus:cantor")[0] == 0


def test_verify_chain_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "chain")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(line.startswith("PASS chain:") for line in lines)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hutchfrac", "export", "cantor"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["name"] == "cantor"


@pytest.mark.slow
def test_verify_axioms_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "axioms")
    assert code == 0 and "FAIL" not in out

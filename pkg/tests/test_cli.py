import json
import subprocess
import sys

import numpy as np
import pytest

from torusmfg.cli import convergence_table, main, refine
from torusmfg.config import parse_config
from torusmfg.io import sha256_file


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def const_cfg(c=0.0, n=32):
    return f"grid.dim = 1\ngrid.n = {n}\nmodel = quadratic\npotential.kind = constant\npotential.value = {c}\n"


COSINE = "grid.dim = 1\ngrid.n = 16\npotential.kind = cosine\npotential.term = 0.1; 1; 0\n"


@pytest.mark.parametrize("c,u", [(0.0, 1.0), (0.3, 0.7)])
def test_solve_constant(tmp_path, c, u, capsys):
    out = tmp_path / "out"
    assert main(["solve", "--config", write(tmp_path, const_cfg(c)), "--out", str(out)]) == 0
    m_vals = np.loadtxt(out / "m.csv", delimiter=",", skiprows=1)[:, -1]
    u_vals = np.loadtxt(out / "u.csv", delimiter=",", skiprows=1)[:, -1]
    np.testing.assert_allclose(m_vals, 1.0, atol=1e-6)
    np.testing.assert_allclose(u_vals, u, atol=1e-6)
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "converged"
    assert list(report) == ["status", "grid", "model", "solver", "summary", "stages"]
    manifest = json.loads((out / "manifest.json").read_text())
    for entry in manifest["files"]:
        assert sha256_file(out / entry["name"]) == entry["sha256"]
    assert parse_config(manifest["config"]) == parse_config(const_cfg(c))
    assert "converged" in capsys.readouterr().out


def test_malformed_config_writes_nothing(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", write(tmp_path, "grid.n = 8\nsolver.gamma = 2\n"), "--out", str(out)]) == 1
    assert not out.exists()


def test_nonconvergence_exit_code(tmp_path):
    cfg = "grid.dim = 1\ngrid.n = 16\npotential.kind = cosine\npotential.term = 3.0; 1; 0\nsolver.max_inner_iters = 100\n"
    out = tmp_path / "out"
    assert main(["solve", "--config", write(tmp_path, cfg), "--out", str(out)]) == 2
    assert (out / "m.csv").exists() and (out / "report.json").exists()


def test_seed_override_and_byte_identical_outputs(tmp_path):
    cfg = write(tmp_path, COSINE + "solver.init = random\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--config", cfg, "--out", str(a), "--seed", "7"]) == 0
    assert main(["solve", "--config", cfg, "--out", str(b), "--seed", "7"]) == 0
    for name in ("m.csv", "u.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert json.loads((a / "report.json").read_text())["solver"]["seed"] == 7


def test_check_passes(tmp_path, capsys):
    assert main(["check", "--config", write(tmp_path, COSINE)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 9


def test_check_negative_control(tmp_path, capsys):
    assert main(["check", "--config", write(tmp_path, COSINE), "--inject", "broken-divergence"]) != 0
    lines = capsys.readouterr().out.splitlines()
    assert any(l.startswith("FAIL") and "summation by parts" in l for l in lines)


def test_check_verdicts_seed_independent(tmp_path, capsys):
    verdicts = []
    for seed in (0, 123):
        main(["check", "--config", write(tmp_path, COSINE + f"solver.seed = {seed}\n")])
        verdicts.append([l.split()[0] for l in capsys.readouterr().out.splitlines()])
    assert verdicts[0] == verdicts[1]


def test_refine():
    f = np.array([0.0, 1.0, 2.0, 3.0])
    np.testing.assert_array_equal(refine(f), [0, 0.5, 1, 1.5, 2, 2.5, 3, 1.5])
    g2 = refine(np.ones((3, 3)))
    assert g2.shape == (6, 6) and np.all(g2 == 1)


def test_convergence_constant_exact():
    rows = convergence_table(parse_config(const_cfg(0.0, n=8)), 3)
    assert [r["n"] for r in rows] == [8, 16, 32]
    assert all(r["diff"] <= 1e-8 for r in rows[1:])


def test_convergence_cosine_decays():
    rows = convergence_table(parse_config(COSINE.replace("16", "32")), 4)
    assert all(r["status"] == "converged" for r in rows)
    # measured ratios ~0.41 and ~0.47
    assert all(r["ratio"] <= 0.7 for r in rows[2:])


def test_convergence_single_level(tmp_path, capsys):
    assert main(["convergence", "--config", write(tmp_path, const_cfg(n=8)), "--levels", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and lines[1].split()[-2:] == ["-", "-"]


def test_console_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "torusmfg.cli", "check", "--config", write(tmp_path, "grid.n = 8\n")],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr

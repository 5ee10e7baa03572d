import csv
import json
import math

import numpy as np
import pytest

from quadprop.cli import main
from quadprop.reference import free_K, sho_K


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


BASE = {"grid": {"x_min": -3.0, "x_max": 3.0, "n": 16}, "times": [0.5, 1.5]}


@pytest.mark.parametrize("kind", ["free", "sho"])
def test_propagator_table_matches_closed_form(tmp_path, kind):
    cfg = dict(BASE, F1="0" if kind == "free" else "0.5", x0=0.4, mass=1.0, hbar=1.0)
    out = tmp_path / "k.csv"
    assert main(["propagator", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 32
    for r in rows:
        x, t = float(r["x"]), float(r["t"])
        ref = free_K(1, 1, x, t, 0.4, 0.0) if kind == "free" else sho_K(1, 1, 1, x, t, 0.4, 0.0)
        K = complex(float(r["re_K"]), float(r["im_K"]))
        assert abs(K - ref) < 1e-10 * abs(ref)
        assert r["status"] == "ok"


def test_propagator_flags_caustic_rows(tmp_path):
    cfg = dict(BASE, F1="0.5", times=[1.0, math.pi, 4.0])
    out = tmp_path / "k.csv"
    assert main(["propagator", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    statuses = {float(r["t"]): r["status"] for r in _rows(out)}
    assert statuses[1.0] == "ok"
    assert statuses[4.0] == "beyond_caustic"
    assert main(["propagator", "--config", _write(tmp_path, cfg), "--out", str(out),
                 "--allow-caustic-phase"]) == 0
    rows = [r for r in _rows(out) if float(r["t"]) == 4.0]
    assert all(r["status"] == "ok" for r in rows)
    assert float(rows[0]["arg_f"]) == pytest.approx(-3 * math.pi / 4)


def test_propagator_json(tmp_path):
    out = tmp_path / "k.json"
    assert main(["propagator", "--config", _write(tmp_path, dict(BASE, F1="0")), "--out", str(out),
                 "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"][:4] == ["x", "t", "re_K", "im_K"]
    assert len(doc["rows"]) == 32


def test_malformed_expression_exit_2(tmp_path, capsys):
    assert main(["propagator", "--config", _write(tmp_path, dict(BASE, F1="0.5*w"))]) == 2
    assert 'unknown identifier "w"' in capsys.readouterr().err
    assert main(["propagator", "--config", _write(tmp_path, dict(BASE, F1="0.5*(t"))]) == 2


@pytest.mark.parametrize(
    "patch",
    [{"times": []}, {"grid": {"x_min": -1, "x_max": 1, "n": 100}}, {"mass": -1},
     {"times": [0.0]}, {"tolerances": {"rtol": 0}}, {"bogus": 1}],
)
def test_config_errors_exit_2(tmp_path, patch):
    assert main(["verify", "--config", _write(tmp_path, dict(BASE, F1="0", **patch))]) == 2


def test_missing_config_and_bad_json(tmp_path):
    assert main(["propagator"]) == 2
    assert main(["propagator", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["evolve", "--config", str(bad)]) == 2
    assert main(["frobnicate"]) == 2


def test_evolve_sho(tmp_path, configs_dir):
    out = tmp_path / "ev.csv"
    cfg = str(configs_dir / "sho.json")
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 3
    assert main(["evolve", "--config", cfg, "--out", str(out), "--allow-caustic-phase"]) == 0
    rows = _rows(out)
    for r in rows:
        t = float(r["t"])
        assert float(r["mean_x"]) == pytest.approx(math.cos(t), abs=1e-6)
        assert abs(float(r["norm"]) - 1) <= 1e-8
    snaps = sorted(tmp_path.glob("ev_t*.csv"))
    assert len(snaps) == len(rows)
    first = _rows(snaps[0])
    assert len(first) == 2048 and set(first[0]) == {"x", "re_psi", "im_psi", "abs2_psi"}


def test_evolve_json(tmp_path):
    cfg = dict(BASE, F1="0", grid={"x_min": -12, "x_max": 12, "n": 1024},
               initial_state={"xbar": 0, "pbar": 0, "sigma": 1.0}, times=[0.5])
    out = tmp_path / "ev.json"
    assert main(["evolve", "--config", _write(tmp_path, cfg), "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["snapshots"]) == 1 and len(doc["snapshots"][0]["rows"]) == 1024


def test_evolve_support_error_exit_3(tmp_path):
    cfg = dict(BASE, F1="0", initial_state={"xbar": 0, "pbar": 0, "sigma": 1.0})
    assert main(["evolve", "--config", _write(tmp_path, cfg)]) == 3


def test_classical_command(tmp_path, configs_dir):
    out = tmp_path / "cl.csv"
    assert main(["classical", "--config", str(configs_dir / "driven.json"), "--out", str(out)]) == 0
    rows = _rows(out)
    xf = np.array([float(r["x_field"]) for r in rows])
    xn = np.array([float(r["x_newton"]) for r in rows])
    assert np.max(np.abs(xf - xn)) < 1e-8
    assert float(rows[-1]["x_newton"]) == pytest.approx(1.3)


def test_deterministic_output(tmp_path, configs_dir):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(configs_dir / "driven.json")
    assert main(["propagator", "--config", cfg, "--out", str(a)]) == 0
    assert main(["propagator", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    # 17 significant digits round-trip exactly
    row = a.read_text().splitlines()[5].split(",")
    assert len(row) == 8 and "%.17g" % float(row[2]) == row[2]


def test_verify_builtin_corpora(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["verify", "--corpus", "all", "--out", str(out)]) == 0
    rows = _rows(out)
    assert {r["corpus"] for r in rows} == {"free", "sho", "driven"}
    assert {r["check"] for r in rows} >= {
        "riccati_residual", "schrodinger_residual", "composition", "delta_limit",
        "extremal_vs_newton", "action_consistency", "driven_invariance"}
    assert all(r["status"] == "pass" for r in rows)


def test_verify_corruption_fails(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["verify", "--corpus", "free", "--corrupt", "1.01", "--out", str(out)]) == 4
    status = {r["check"]: r["status"] for r in _rows(out)}
    assert status["schrodinger_residual"] == "fail"


def test_verify_with_config(tmp_path, configs_dir, capsys):
    assert main(["verify", "--config", str(configs_dir / "driven.json"), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True


def test_verify_config_past_caustic_exit_2(tmp_path):
    cfg = dict(BASE, F1="0.5", times=[4.0])
    assert main(["verify", "--config", _write(tmp_path, cfg)]) == 2

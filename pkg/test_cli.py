#!/usr/bin/env python3
"""
Command-line surface: exit codes, written artefacts and determinism.
"""

import csv
import json
import math
import os
import shutil

import pytest

import app.cli as cli
from app.core.acceptance import CheckResult
from app.core.errors import QuadratureNonConvergence
from app.core.fixtures import isolated_zero_path
from app.core.path_loader import path_to_spec

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def _data(name):
    return os.path.join(DATA_DIR, name)


def _report(out):
    with open(os.path.join(out, "report.json"), encoding="utf-8") as f:
        return json.load(f)


def _csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


# ===== SUCCESS =====

def test_reparam_collapses_plateau(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["reparam", "--input", _data("plateau.json"), "--out", out]) == 0
    report = _report(out)
    assert report["ok"] is True
    assert report["collapsed"] is True
    assert report["length"] == pytest.approx(math.atanh(0.5), abs=1e-8)
    rows = _csv(os.path.join(out, "sigma.csv"))
    assert rows[0] == ["u", "re_1", "im_1", "speed"]
    assert len(rows) > 100


def test_metric_distance_and_royden(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["metric", "--input", _data("metric_disc.json"), "--out", out]) == 0
    assert _report(out)["value"] == pytest.approx(4.0 / 3.0)

    assert cli.main(["royden", "--input", _data("royden_disc.json"), "--out", out]) == 0
    assert _report(out)["value"] == pytest.approx(1.0, abs=1e-10)

    assert cli.main(["distance", "--input", _data("distance_annulus.json"), "--out", out]) == 0
    report = _report(out)
    assert report["distance"] == pytest.approx(math.pi ** 2 / (2 * math.log(4.0)))
    assert report["upper_bound"] >= report["distance"] - 1e-9


def test_corollary_commands(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["corollary-a", "--input", _data("radial.json"), "--out", out]) == 0
    for name in ("sigma.csv", "slack.csv", "chord_arc_slack.csv"):
        assert os.path.exists(os.path.join(out, name))
    assert _report(out)["almost_geodesic"]["verdict"] == "pass"

    assert cli.main(["corollary-b", "--input", _data("radial.json"), "--lambda", "1.34", "--out", out]) == 0
    assert _report(out)["report"]["params"]["lambda"] == pytest.approx(1.34 ** 2)


def test_reports_are_deterministic(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli.main(["reparam", "--input", _data("spiral.json"), "--out", a]) == 0
    assert cli.main(["reparam", "--input", _data("spiral.json"), "--out", b]) == 0
    for name in ("report.json", "sigma.csv"):
        with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
            assert fa.read() == fb.read()


# ===== VERDICT FAILURES =====

def test_verify_chord_arc_failure_writes_slack(tmp_path):
    out = str(tmp_path / "out")
    code = cli.main(["verify-ca", "--input", _data("spiral.json"), "--lambda", "1", "--kappa", "0", "--out", out])
    assert code == 1
    report = _report(out)
    assert report["ok"] is False
    assert report["report"]["verdict"] == "fail"
    rows = _csv(os.path.join(out, "slack.csv"))
    assert rows[0] == ["s", "t", "lhs", "rhs", "slack"]
    assert len(rows) == 1 + 64 * 63 // 2
    assert max(float(r[4]) for r in rows[1:]) == pytest.approx(report["report"]["worst_slack"])


def test_hypothesis_violation_exits_one(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["corollary-a", "--input", _data("spiral.json"), "--out", out]) == 1
    report = _report(out)
    assert report["error"] == "HypothesisViolated"
    assert report["report"]["kind"] == "chord-arc"


# ===== INPUT ERRORS =====

def test_point_outside_domain_exits_two(tmp_path):
    spec = _write(tmp_path, "outside.json", {"domain": {"kind": "disc"}, "z": [[1.5, 0.0]], "v": [[1.0, 0.0]]})
    assert cli.main(["metric", "--input", spec, "--out", str(tmp_path / "out")]) == 2


def test_missing_or_broken_input_exits_two(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["reparam", "--out", out]) == 2
    assert cli.main(["reparam", "--input", str(tmp_path / "missing.json"), "--out", out]) == 2
    assert cli.main(["reparam", "--input", _write(tmp_path, "bad.json", "{oops"), "--out", out]) == 2
    assert cli.main(["verify-ag", "--input", _data("radial.json"), "--lambda", "0.5", "--out", out]) == 2


def test_demo_with_corrupted_spec_exits_two(tmp_path):
    data = tmp_path / "data"
    shutil.copytree(DATA_DIR, data)
    (data / "plateau.json").write_text('{"domain": {"kind": "disc"}, "T": 3.0}')
    assert cli.main(["demo", "--data-dir", str(data), "--out", str(tmp_path / "out")]) == 2


# ===== EXIT MAPPING =====

def test_numerical_error_exits_three(tmp_path, monkeypatch):
    def _explode(config):
        raise QuadratureNonConvergence(0.0, 1.0, 30)

    monkeypatch.setitem(cli.HANDLERS, "metric", _explode)
    assert cli.main(["metric", "--input", _data("metric_disc.json"), "--out", str(tmp_path)]) == 3


def test_demo_prints_table_and_reflects_failures(tmp_path, monkeypatch, capsys):
    results = [CheckResult(1, "geodesic recovery", True, "ok"), CheckResult(2, "unit-speed suite", False, "bad")]
    monkeypatch.setattr(cli, "run_acceptance", lambda *args, **kwargs: results)
    assert cli.main(["demo", "--out", str(tmp_path)]) == 1
    printed = capsys.readouterr().out
    assert "geodesic recovery" in printed and "FAILURES" in printed

    monkeypatch.setattr(cli, "run_acceptance", lambda *args, **kwargs: results[:1])
    assert cli.main(["demo", "--out", str(tmp_path)]) == 0
    assert "ALL PASS" in capsys.readouterr().out


# ===== MALFORMED VALUES =====

def test_malformed_values_exit_two(tmp_path):
    out = str(tmp_path / "out")
    metric = _write(tmp_path, "metric.json", {"domain": {"kind": "disc"}, "z": "abc", "v": [[1.0, 0.0]]})
    assert cli.main(["metric", "--input", metric, "--out", out]) == 2

    royden = _write(tmp_path, "royden.json", {
        "domain": {"kind": "disc"}, "x": [[0.0, 0.0]], "radius": "big", "n_points": 64, "n_dirs": 16,
    })
    assert cli.main(["royden", "--input", royden, "--out", out]) == 2

    counts = _write(tmp_path, "counts.json", {
        "domain": {"kind": "disc"}, "x": [[0.0, 0.0]], "radius": 0.25, "n_points": [64], "n_dirs": 16,
    })
    assert cli.main(["royden", "--input", counts, "--out", out]) == 2


# ===== TIGHT QUADRATURE =====

def test_reparam_of_sampled_path_with_tight_quad_tol(tmp_path):
    spec = _write(tmp_path, "sampled.json", path_to_spec(isolated_zero_path()))
    out = str(tmp_path / "out")
    assert cli.main(["reparam", "--input", spec, "--quad-tol", "1e-10", "--out", out]) == 0
    assert _report(out)["collapsed"] is False


def test_demo_with_tight_quad_tol_still_passes(tmp_path):
    assert cli.main(["demo", "--quad-tol", "1e-10", "--out", str(tmp_path / "out")]) == 0

"""CLI behavior: exit-code contract, report shapes, determinism, CSV."""

import io
import json
import math
from pathlib import Path

import jsonschema
import pytest

from lorentzkit.cli import run

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "report_schema.json")
    .read_text())


def run_cli(argv):
    buf = io.StringIO()
    code = run(argv, buf)
    return code, buf.getvalue()


def run_json(argv):
    code, text = run_cli(argv)
    rep = json.loads(text)
    jsonschema.validate(rep, SCHEMA)
    return code, rep


class TestCatalogAndAnalyze:
    def test_catalog_lists_builtins(self):
        code, rep = run_json(["catalog"])
        assert code == 0
        assert "schwarzschild_ef" in rep["builtins"]

    def test_analyze_minkowski(self):
        code, rep = run_json(["analyze", "builtin:minkowski", "--at", "0,0,0,0"])
        assert code == 0
        assert rep["signature_index"] == 1
        assert rep["ricci_scalar"] == 0.0
        assert rep["kretschmann"] == 0.0

    def test_analyze_desitter_invariants(self):
        code, rep = run_json(["analyze", "builtin:desitter", "--at", "0,0,0,0"])
        assert rep["ricci_scalar"] == pytest.approx(12.0, rel=1e-9)
        assert rep["kretschmann"] == pytest.approx(24.0, rel=1e-9)

    def test_param_override(self):
        code, rep = run_json(["analyze", "builtin:schwarzschild_ef",
                              "--param", "M=2.0", "--at", "0,8,1.5707963,0"])
        assert code == 0
        # Kretschmann = 48 M^2 / r^6
        assert rep["kretschmann"] == pytest.approx(48 * 4.0 / 8.0 ** 6, rel=1e-6)


class TestExitCodes:
    def test_check_holds_exit_zero(self):
        code, rep = run_json(["check", "builtin:torus_quotient", "--condition",
                              "E", "--points", "6", "--dirs", "8"])
        assert code == 0
        assert rep["satisfied"] is True
        assert rep["result"]["verdict"] == "holds-weakly"

    def test_check_violated_exit_one(self):
        code, rep = run_json(["check", "builtin:desitter", "--condition", "E",
                              "--points", "6", "--dirs", "8"])
        assert code == 1
        assert rep["result"]["verdict"] == "violated"

    def test_strict_flag_demotes_weak_to_failure(self):
        code, rep = run_json(["check", "builtin:minkowski", "--condition", "E",
                              "--strict", "--points", "6", "--dirs", "8"])
        assert code == 1
        assert rep["result"]["verdict"] == "holds-weakly"

    def test_usage_error_exit_two(self):
        code, _ = run_cli(["check", "builtin:minkowski", "--condition",
                           "NOT_A_CONDITION"])
        assert code == 2

    def test_missing_file_exit_two(self):
        code, _ = run_cli(["analyze", "/nonexistent/file", "--at", "0,0"])
        assert code == 2

    def test_computational_error_exit_one(self):
        code, text = run_cli(["classify", "builtin:minkowski",
                              "--submanifold", "nope"])
        assert code == 1
        rep = json.loads(text)
        assert "error" in rep

    def test_unknown_builtin_exit_one(self):
        code, text = run_cli(["analyze", "builtin:kerr", "--at", "0,0,0,0"])
        assert code == 1
        assert "kerr" in json.loads(text)["error"]


class TestCommands:
    def test_classify_report(self):
        code, rep = run_json(["classify", "builtin:schwarzschild_ef",
                              "--submanifold", "horizon_sphere"])
        assert code == 0
        assert rep["verdict"]["class"] == "weakly-future-trapped"
        assert rep["verdict"]["subtype"] == "MOTS"

    def test_check_inclusions(self):
        code, rep = run_json(["check", "builtin:flrw_dust", "--condition",
                              "inclusions", "--points", "6", "--dirs", "8"])
        assert code == 0
        assert rep["result"]["verdict"] == "consistent"

    def test_check_orientation_and_temporal(self):
        for cond in ("orientation", "temporal"):
            code, rep = run_json(["check", "builtin:torus_quotient",
                                  "--condition", cond, "--points", "6",
                                  "--dirs", "8"])
            assert code == 0
            assert rep["result"]["verdict"] == "PASSED"

    def test_gs_command(self):
        # a negative trace is a failed hypothesis check: exit code 1
        code, rep = run_json(["gs", "builtin:desitter", "--submanifold",
                              "sphere", "--at", "1.5707963,0.5", "--dir",
                              "1,0,0,0", "--length", "1"])
        assert code == 1
        assert rep["result"]["min_trace"] == pytest.approx(-2.0, rel=1e-6)
        code, rep = run_json(["gs", "builtin:minkowski", "--submanifold",
                              "sphere", "--at", "1.5707963,0", "--dir",
                              "1,1,0,0", "--length", "1"])
        assert code == 0

    def test_geodesic_with_transport(self):
        code, rep = run_json(["geodesic", "builtin:minkowski", "--from",
                              "0,0,0,0", "--dir", "1,0.5,0,0", "--length", "2",
                              "--transport", "0,1,0,0;0,0,1,0"])
        assert code == 0
        assert rep["result"]["samples"][-1]["point"][0] == pytest.approx(2.0)
        assert rep["result"]["transport"]["product_drift"] < 1e-8

    def test_perturb_33_json(self):
        code, rep = run_json(["perturb", "builtin:torus_quotient", "--theorem",
                              "3.3", "--submanifold", "S", "--at", "0,0",
                              "--nmax", "4"])
        assert code == 0
        fam = rep["family"]
        assert fam["case"] == "zero-H"
        assert all(c["certificate"] > 0 for c in fam["certificates"])

    def test_perturb_42_csv(self):
        code, text = run_cli(["perturb", "builtin:minkowski", "--theorem",
                              "4.2", "--at", "0,0,0,0", "--witness",
                              "v=1,0,0,0", "w=0,0,1,0", "--nmax", "3",
                              "--format", "csv"])
        assert code == 0
        lines = text.strip().splitlines()
        assert lines[0].startswith("n,certificate")
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[1]) == pytest.approx(-math.exp(2.0) / 1.0)

    def test_perturb_42_requires_witness(self):
        code, text = run_cli(["perturb", "builtin:minkowski", "--theorem",
                              "4.2", "--at", "0,0,0,0"])
        assert code == 1
        assert "witness" in json.loads(text)["error"]


class TestDeterminism:
    def test_reports_byte_identical(self):
        argv = ["check", "builtin:schwarzschild_ef", "--condition", "FP",
                "--seed", "0", "--points", "6", "--dirs", "8"]
        _, a = run_cli(argv)
        _, b = run_cli(argv)
        assert a == b

    def test_seed_changes_samples(self):
        argv = lambda s: ["check", "builtin:flrw_dust", "--condition", "SE",
                          "--seed", s, "--points", "6", "--dirs", "8"]
        _, a = run_cli(argv("0"))
        _, b = run_cli(argv("1"))
        assert a != b

    def test_timing_flag_adds_wall_time(self):
        code, rep = run_json(["classify", "builtin:torus_quotient",
                              "--submanifold", "S", "--timing"])
        assert code == 0
        assert "wall_time_s" in rep

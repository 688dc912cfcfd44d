"""Command-line interface tests: flags, outputs, exit codes, determinism."""

import json

import numpy as np
import pytest

from eulerlab.cli import main

TWO_LAMBDA_REF = 0.24822301804110671 + 0.35172076458544751j


def run(*argv):
    return main(list(argv))


class TestSpectrumCommand:
    def test_reference_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run(
            "spectrum", "--p", "1,1", "--khat", "-3,-2", "--gamma", "1.0",
            "--convention", "formula", "--method", "cf", "--output", str(out),
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["convention"] == "formula"
        best = min(
            abs(complex(e["re"], e["im"]) - TWO_LAMBDA_REF)
            for e in doc["two_lambda_over_gamma"]
        )
        assert best < 1e-9
        printed = capsys.readouterr().out
        assert "2*lambda/|Gamma|" in printed
        assert "band halfwidth" in printed

    def test_empty_class_report(self, tmp_path):
        out = tmp_path / "empty.json"
        code = run("spectrum", "--p", "1,1", "--khat", "0,3", "--output", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["eigenvalues"] == []
        assert doc["band"] == pytest.approx(1.5)

    def test_parallel_class_report(self, tmp_path):
        out = tmp_path / "parallel.json"
        code = run("spectrum", "--p", "1,1", "--khat", "2,2", "--output", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["eigenvalues"] == []
        assert doc["band"] == 0.0

    def test_sweep_multiple_khat(self, tmp_path, monkeypatch):
        monkeypatch.setenv("EULER_LAB_THREADS", "2")
        out = tmp_path / "sweep.json"
        code = run(
            "spectrum", "--p", "1,1", "--khat", "-3,-2", "--khat", "0,3",
            "--output", str(out),
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["reports"]) == 2
        assert doc["reports"][0]["khat"] == [-3, -2]
        assert doc["reports"][1]["khat"] == [0, 3]

    def test_determinism(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for out in (a, b):
            assert run("spectrum", "--p", "1,1", "--khat", "-3,-2", "--output", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_truncation_method(self, tmp_path):
        out = tmp_path / "trunc.json"
        code = run(
            "spectrum", "--p", "1,1", "--khat", "-3,-2", "--method", "truncation",
            "--truncation-n", "60", "--output", str(out),
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "truncation-60"
        assert len(doc["eigenvalues"]) == 121

    def test_nonconvergence_exit_code(self, tmp_path):
        out = tmp_path / "stuck.json"
        code = run(
            "spectrum", "--p", "1,1", "--khat", "-3,-2", "--tol", "1e-30",
            "--output", str(out),
        )
        assert code == 3
        doc = json.loads(out.read_text())
        assert doc["unresolved"]

    def test_bad_vector_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            run("spectrum", "--p", "nonsense", "--khat", "1,1")
        assert info.value.code == 2


class TestSimulateCommand:
    def test_fixed_point_is_constant(self, tmp_path):
        out = tmp_path / "traj.csv"
        code = run(
            "simulate", "--fixed-point", "1.0", "--t1", "10", "--dt", "0.1",
            "--output", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("t,w1,w2,w3,w4,wp,w0,w5,I,U,J")
        first = [float(v) for v in lines[1].split(",")]
        last = [float(v) for v in lines[-1].split(",")]
        assert first[1:] == last[1:]

    def test_adaptive_run_with_drift_gate(self, tmp_path):
        ic = tmp_path / "ic.json"
        ic.write_text(json.dumps({"w1": 0.4, "w2": -0.1, "w3": 0.2, "w4": 0.1, "wp": 0.9}))
        out = tmp_path / "traj.csv"
        code = run(
            "simulate", "--ic", str(ic), "--t1", "20", "--tol", "1e-10",
            "--integrator", "rk45", "--max-drift", "1e-8", "--output", str(out),
        )
        assert code == 0

    def test_drift_gate_failure(self, tmp_path):
        ic = tmp_path / "ic.json"
        ic.write_text(json.dumps([0.4, -0.1, 0.2, 0.1, 0.9, 0.0, 0.0]))
        code = run(
            "simulate", "--ic", str(ic), "--t1", "20", "--dt", "0.5",
            "--max-drift", "1e-16", "--output", str(tmp_path / "t.csv"),
        )
        assert code == 4

    def test_conflicting_controls(self, tmp_path):
        code = run("simulate", "--fixed-point", "1.0", "--t1", "1")
        assert code == 2  # neither dt nor tol

    def test_integrator_consistency(self):
        code = run("simulate", "--fixed-point", "1.0", "--t1", "1",
                   "--tol", "1e-8", "--integrator", "rk4")
        assert code == 2


class TestHomoclinicCommand:
    def test_orbit_with_residual_check(self, tmp_path, capsys):
        out = tmp_path / "orbit.csv"
        code = run(
            "homoclinic", "--gamma", "1.0", "--branch", "plus", "--samples", "2001",
            "--check-residual", "--output", str(out),
        )
        assert code == 0
        err = capsys.readouterr().err
        assert "max orbit residual" in err
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2002

    def test_minus_branch(self, tmp_path):
        code = run(
            "homoclinic", "--gamma", "0.5", "--branch", "minus", "--samples", "101",
            "--check-residual", "--output", str(tmp_path / "o.csv"),
        )
        assert code == 0

    def test_gamma_zero_is_usage_error(self, tmp_path):
        code = run("homoclinic", "--gamma", "0", "--samples", "11",
                   "--output", str(tmp_path / "o.csv"))
        assert code == 2


class TestDarbouxCommand:
    def test_worked_example(self, tmp_path):
        out = tmp_path / "darboux.json"
        code = run(
            "darboux", "--example", "cosine", "--gamma", "1.0", "--epsilon", "0.1",
            "--grid", "128", "--output", str(out),
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert all(v < 1e-8 for v in doc["residuals"].values())
        assert doc["mask_fraction"] < 0.05


class TestJacobiCommand:
    def test_dealiased_residuals(self, tmp_path):
        out = tmp_path / "jacobi.json"
        code = run(
            "jacobi", "--grid", "64", "--degree", "4", "--trials", "5",
            "--seed", "42", "--output", str(out),
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["max_residual"] < 1e-10
        assert len(doc["residuals"]) == 5

    def test_underresolved_grid_fails_gate(self, tmp_path):
        # degree 5 on a 16-point grid violates the n/6 dealiasing bound
        code = run(
            "jacobi", "--grid", "16", "--degree", "5", "--trials", "2",
            "--seed", "42", "--output", str(tmp_path / "j.json"),
        )
        assert code == 4

    def test_seeded_determinism(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for out in (a, b):
            assert run("jacobi", "--grid", "32", "--degree", "2", "--trials", "3",
                       "--seed", "7", "--output", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

import json
import math
import subprocess
import sys

import pytest

from mixfrac.cli import RunConfig, load_config_file, main
from mixfrac.fixed_point import PicardTrace
from mixfrac.io import dumps_report, emit_convergence_csv, read_csv_rows


def run_cli(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, out, report


class TestCommands:
    def test_bounds(self, tmp_path):
        code, _, rep = run_cli(tmp_path, "--command", "bounds")
        assert code == 0
        for key in ("q", "m", "h_constant", "eps_max", "sigma"):
            assert math.isfinite(rep[key]) and rep[key] > 0
        labels = [row["label"] for row in rep["radius_minimizer_table"]]
        assert labels[:2] == ["size_bound", "lipschitz_bound"]
        assert rep["embedding_violations"] == []

    def test_solve_zero_eps(self, tmp_path):
        code, out, rep = run_cli(tmp_path, "--command", "solve", "--eps", "0")
        assert code == 0
        assert rep["iterations"] == 1 and rep["up_h2"] == 0.0
        assert len(read_csv_rows(out / "trace.csv")) == 1

    def test_solve_convergence_column_monotone(self, tmp_path):
        code, out, rep = run_cli(tmp_path, "--command", "solve")
        assert code == 0 and rep["converged"] and rep["certified"]
        dists = [float(r["h2_distance"]) for r in read_csv_rows(out / "trace.csv")]
        assert len(dists) == rep["iterations"]
        assert all(b <= a for a, b in zip(dists, dists[1:]))

    def test_linear(self, tmp_path):
        code, _, rep = run_cli(tmp_path, "--command", "linear", "--scenario", "regime-b-linear")
        assert code == 0
        assert rep["regime"] == "linear-b" and rep["orthogonality_satisfied"]
        assert rep["identity_residual_l2"] < 1e-9

    def test_sweep(self, tmp_path):
        code, out, rep = run_cli(tmp_path, "--command", "sweep", "--seed", "3")
        assert code == 0
        rows = read_csv_rows(out / "sweep.csv")
        assert len(rows) == len(rep["points"]) == RunConfig().sweep_points
        assert float(rows[-1]["eps"]) == pytest.approx(rep["bounds"]["eps_max"])
        for r in read_csv_rows(out / "contraction.csv"):
            assert float(r["ratio"]) <= float(r["bound"]) + 1e-8

    def test_sequences(self, tmp_path):
        code, out, rep = run_cli(tmp_path, "--command", "sequences")
        assert code == 0 and not rep["any_flagged"]
        assert len(read_csv_rows(out / "sequences.csv")) == RunConfig().sequence_count

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "mixfrac", "--command", "bounds", "--out", str(tmp_path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("bounds:")


class TestExitCodes:
    def test_unknown_scenario(self, tmp_path):
        assert run_cli(tmp_path, "--scenario", "nope")[0] == 2

    def test_bad_rho(self, tmp_path):
        assert run_cli(tmp_path, "--rho", "1.5")[0] == 2

    def test_negative_eps(self, tmp_path):
        assert run_cli(tmp_path, "--eps", "-1")[0] == 2

    def test_missing_config(self, tmp_path):
        assert run_cli(tmp_path, "--config", str(tmp_path / "none.ini"))[0] == 2

    def test_nonlinear_command_on_linear_scenario(self, tmp_path):
        assert run_cli(tmp_path, "--command", "solve", "--scenario", "regime-b-linear")[0] == 3

    @pytest.mark.filterwarnings("ignore:iterate:RuntimeWarning")
    def test_uncertified_eps_leaves_interval(self, tmp_path):
        assert run_cli(tmp_path, "--command", "solve", "--eps", "1")[0] == 3

    def test_assumption_from_config(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[run]\ncommand = bounds\n\n[g]\nkind = power\ndegree = 1\n")
        assert run_cli(tmp_path, "--config", str(cfg))[0] == 3

    def test_nonconvergence(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[run]\ncommand = solve\nmax_iters = 2\ntol = 1e-30\n")
        code, out, rep = run_cli(tmp_path, "--config", str(cfg))
        assert code == 4
        assert rep["converged"] is False
        assert len(read_csv_rows(out / "trace.csv")) == 2


class TestConfig:
    INI = """
[run]
command = solve
eps = 5e-4
seed = 7

[scenario]
base = gauss-quadratic
s2 = 0.8

[kernel]
kind = gaussian
width = 0.6
"""

    def test_inline_scenario(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text(self.INI)
        data = load_config_file(cfg)
        assert data["eps"] == 5e-4 and data["scenario"]["s2"] == 0.8
        assert data["scenario"]["kernel"] == {"kind": "gaussian", "width": 0.6}
        code, _, rep = run_cli(tmp_path, "--config", str(cfg))
        assert code == 0
        assert rep["scenario"]["s2"] == 0.8 and rep["eps"] == 5e-4

    def test_report_config_round_trips(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text(self.INI)
        _, _, rep = run_cli(tmp_path, "--config", str(cfg), "--n", "16")
        again = RunConfig.from_dict(rep["config"])
        assert again.to_dict() == rep["config"]
        assert again.n == 16 and again.scenario.exps.s2 == 0.8

    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[run]\ncommand = solve\neps = 1e-4\n")
        _, _, rep = run_cli(tmp_path, "--config", str(cfg), "--eps", "0")
        assert rep["eps"] == 0.0

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            RunConfig.from_dict({"epsilon": 1.0})


class TestArtifacts:
    def test_empty_trace_is_header_only(self, tmp_path):
        emit_convergence_csv(tmp_path / "t.csv", PicardTrace())
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert lines[-1] == "iteration,h2_norm,h2_distance,contraction_ratio"
        assert all(ln.startswith("#") for ln in lines[:-1])

    def test_json_full_precision(self):
        x = 0.1 + 0.2
        assert json.loads(dumps_report({"x": x}))["x"] == x
        assert json.loads(dumps_report({"x": math.nan}))["x"] is None

    def test_sweep_deterministic(self, tmp_path):
        outs = []
        for i in range(2):
            out = tmp_path / f"run{i}"
            assert main(["--command", "sweep", "--seed", "5", "--out", str(out)]) == 0
            outs.append(out)
        for name in ("sweep.csv", "contraction.csv", "report.json"):
            a = (outs[0] / name).read_bytes()
            b = (outs[1] / name).read_bytes()
            if name == "report.json":
                a, b = (json.loads(x) for x in (a, b))
                a["config"].pop("output_dir")
                b["config"].pop("output_dir")
            assert a == b, name

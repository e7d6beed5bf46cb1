"""
End-to-end tests of the command-line front-end on small experiment documents
"""

import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from levylab.cli import main, run


def write_config(directory, document):
    path = directory / "experiment.yaml"
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    return path


def invoke(path, out):
    return CliRunner().invoke(main, [str(path), "--out", str(out), "--quiet"])


class TestCli:
    """Test each subcommand and the exit codes"""

    @pytest.fixture
    def out(self, tmp_path):
        return tmp_path / "results"

    def test_check(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "check", "problem": {"preset": "eikonal"},
                                       "numerics": {"check_samples": 64, "seeds": [0]}})
        result = invoke(path, out)
        assert result.exit_code == 0, result.output
        checks = pd.read_csv(out / "checks.csv")
        assert len(checks) > 0
        assert (out / "diagnostics.csv").exists()
        assert "PASS" in result.output

    def test_evolve(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "evolve", "problem": {"preset": "constant"},
                                       "numerics": {"points_per_axis": 16, "T_final": 0.05, "checkpoints": []}})
        result = invoke(path, out)
        assert result.exit_code == 0, result.output
        trace = pd.read_csv(out / "trace.csv")
        assert trace["t"].iloc[-1] == pytest.approx(0.05)
        final = pd.read_csv(out / "final_state.csv")
        assert list(final.columns) == ["index", "x0", "value"]
        assert final["value"].to_numpy() == pytest.approx(0.025, rel=1e-10)

    def test_stationary(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "stationary", "problem": {"preset": "constant"},
                                       "numerics": {"points_per_axis": 16, "discounts": [1.0]}})
        result = invoke(path, out)
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(out / "stationary_summary.csv")
        assert summary["within_bound"].tolist() == [True]
        states = pd.read_csv(out / "stationary.csv")
        assert states["value"].to_numpy() == pytest.approx(0.5)

    def test_ergodic(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "ergodic", "problem": {"preset": "constant"},
                                       "numerics": {"points_per_axis": 16, "T_final": 1.0,
                                                    "lambda_schedule": [0.1, 0.05], "checkpoints": [0.5, 1.0]},
                                       "output": {"sample_every": 1}})
        result = invoke(path, out)
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(out / "ergodic_summary.csv")
        assert summary["c_discount"].iloc[0] == pytest.approx(0.5)
        assert summary["c_slope"].iloc[0] == pytest.approx(0.5, rel=1e-8)
        for name in ("ergodic.csv", "profile.csv", "trace.csv", "diagnostics.csv"):
            assert (out / name).exists()

    def test_invalid_config(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "check",
                                       "problem": {"preset": "eikonal", "levy": {"family": "fractional",
                                                                                 "order": 2.5}}})
        result = invoke(path, out)
        assert result.exit_code == 2
        assert not out.exists()

    def test_missing_file(self, tmp_path, out):
        assert run(str(tmp_path / "absent.yaml"), str(out), quiet=True) == 2

    def test_solver_failure(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "stationary", "problem": {"preset": "eikonal"},
                                       "numerics": {"points_per_axis": 16, "discounts": [1.0],
                                                    "tolerance": 1e-12, "max_steps": 2}})
        result = invoke(path, out)
        assert result.exit_code == 3
        diagnostics = pd.read_csv(out / "diagnostics.csv")
        errors = diagnostics[diagnostics["event"] == "error"]
        assert errors["error"].tolist() == ["NonConvergenceError"]

    def test_seed_override(self, tmp_path, out):
        path = write_config(tmp_path, {"subcommand": "check", "problem": {"preset": "eikonal"},
                                       "numerics": {"check_samples": 64, "seeds": [0]}})
        assert run(str(path), str(out), seed=5, quiet=True) == 0
        checks = pd.read_csv(out / "checks.csv")
        assert len(checks) > 0

    @pytest.mark.slow
    def test_verify_all_is_reproducible(self, tmp_path, out):
        """Test that two verify-all runs write byte-identical verdicts and diagnostics"""
        path = write_config(tmp_path, {"subcommand": "verify-all", "seed": 0,
                                       "numerics": {"points_per_axis": 64, "T_final": 20.0,
                                                    "checkpoints": [5.0, 10.0, 20.0], "discounts": [1.0, 0.1],
                                                    "check_samples": 512, "seeds": [0]}})
        codes = [run(str(path), str(out / name), quiet=True) for name in ("first", "second")]
        assert codes[0] == codes[1]
        for name in ("verdicts.csv", "diagnostics.csv"):
            first = (out / "first" / name).read_bytes()
            assert first
            assert first == (out / "second" / name).read_bytes(), name

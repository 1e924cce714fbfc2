import csv
import io
import subprocess
import sys

import pytest

from regenmc.cli import entry


def run_cli(*argv, out=None):
    """Run the CLI in-process; returns (exit_code, text_written_to_out)."""
    args = list(argv)
    if out is not None:
        args += ["--out", str(out)]
    code = entry(args)
    text = out.read_text() if out is not None and out.exists() else ""
    return code, text


def parse_csv(text):
    header = [line for line in text.splitlines() if line.startswith("#")]
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    rows = list(csv.reader(io.StringIO(body)))
    return header, rows[0], rows[1:]


class TestEstimate:
    def test_row_shape_and_summary(self, tmp_path):
        code, text = run_cli(
            "estimate", "--model", "two-state", "--beta", "0.5",
            "--estimator", "reg-seq", "--n", "1000", "--reps", "10",
            "--seed", "42", "--theta", "0.5",
            out=tmp_path / "est.csv",
        )
        assert code == 0
        header, columns, rows = parse_csv(text)
        assert columns == ["replicate", "estimator", "value", "tours", "steps", "seed"]
        assert len(rows) == 12  # 10 replicates + mean + mse
        assert [r[0] for r in rows[:10]] == [str(i) for i in range(10)]
        assert rows[10][0] == "mean"
        assert rows[11][0] == "mse"
        assert all(r[5] == "42" for r in rows)
        assert any(line.startswith("# regenmc ") for line in header)
        assert "# seed = 42" in header

    def test_reruns_are_byte_identical(self, tmp_path):
        argv = (
            "estimate", "--model", "two-state", "--estimator", "reg",
            "--r", "100", "--reps", "20", "--seed", "7",
        )
        _, first = run_cli(*argv, out=tmp_path / "a.csv")
        _, second = run_cli(*argv, out=tmp_path / "b.csv")
        assert first == second

    def test_jobs_do_not_change_bytes(self, tmp_path):
        argv = (
            "estimate", "--model", "two-state", "--estimator", "reg",
            "--r", "100", "--reps", "20", "--seed", "7",
        )
        _, serial = run_cli(*argv, out=tmp_path / "a.csv")
        _, pooled = run_cli(*argv, "--jobs", "4", out=tmp_path / "b.csv")
        assert serial == pooled

    def test_every_estimator_runs(self, tmp_path):
        for estimator in ("fixed", "reg", "unbiased", "reg-seq", "perfect"):
            code, text = run_cli(
                "estimate", "--model", "two-state", "--estimator", estimator,
                "--n", "200", "--r", "50", "--seed", "1",
                out=tmp_path / f"{estimator}.csv",
            )
            assert code == 0, estimator
            _, _, rows = parse_csv(text)
            assert rows[-1][0] == "mean"

    def test_unbiased_on_doeblin_model_infers_m(self, tmp_path):
        code, _ = run_cli(
            "estimate", "--model", "two-state", "--estimator", "unbiased",
            "--r", "50", "--seed", "1", out=tmp_path / "u.csv",
        )
        assert code == 0

    def test_unbiased_without_m_rejected_off_doeblin(self, capsys):
        code = entry([
            "estimate", "--model", "drift-bd", "--estimator", "unbiased",
            "--r", "50",
        ])
        assert code == 2
        message = capsys.readouterr().err
        assert "mean tour length" in message
        assert "--m" in message

    def test_unbiased_with_explicit_m_runs_off_doeblin(self, tmp_path):
        code, _ = run_cli(
            "estimate", "--model", "drift-bd", "--estimator", "unbiased",
            "--r", "50", "--m", "3.5", "--seed", "1", out=tmp_path / "m.csv",
        )
        assert code == 0

    def test_perfect_off_doeblin_rejected(self):
        code = entry([
            "estimate", "--model", "drift-bd", "--estimator", "perfect", "--r", "10",
        ])
        assert code == 2

    def test_unknown_model_rejected(self):
        assert entry(["estimate", "--model", "nosuch", "--estimator", "reg",
                      "--r", "10"]) == 2

    def test_missing_budget_rejected(self):
        assert entry(["estimate", "--model", "two-state",
                      "--estimator", "reg-seq"]) == 2

    def test_file_model(self, three_state_file, tmp_path):
        code, text = run_cli(
            "estimate", "--model", f"file:{three_state_file}",
            "--estimator", "reg", "--r", "100", "--seed", "3",
            out=tmp_path / "f.csv",
        )
        assert code == 0
        _, _, rows = parse_csv(text)
        assert rows[-1][0] == "mean"

    def test_missing_file_rejected(self):
        assert entry(["estimate", "--model", "file:/nonexistent/k.txt",
                      "--estimator", "reg", "--r", "10"]) == 2


class TestSeedResolution:
    ARGS = ("estimate", "--model", "two-state", "--estimator", "reg", "--r", "10")

    def test_environment_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("REGEN_SEED", "99")
        _, text = run_cli(*self.ARGS, out=tmp_path / "env.csv")
        assert "# seed = 99" in text

    def test_flag_beats_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("REGEN_SEED", "99")
        _, text = run_cli(*self.ARGS, "--seed", "5", out=tmp_path / "flag.csv")
        assert "# seed = 5" in text

    def test_bad_environment_value_rejected(self, monkeypatch):
        monkeypatch.setenv("REGEN_SEED", "not-a-number")
        assert entry(list(self.ARGS)) == 2


class TestConfigFile:
    def test_config_supplies_options(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# comment line\n"
            "model = two-state\n"
            "beta = 0.4\n"
            "estimator = reg\n"
            "r = 50\n"
            "seed = 7\n"
        )
        code, text = run_cli("estimate", "--config", str(cfg),
                             out=tmp_path / "cfg.csv")
        assert code == 0
        assert "# beta = 0.4" in text
        assert "# seed = 7" in text

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = two-state\nestimator = reg\nr = 50\nbeta = 0.4\n")
        _, text = run_cli("estimate", "--config", str(cfg), "--beta", "0.2",
                          out=tmp_path / "cfg.csv")
        assert "# beta = 0.2" in text

    def test_malformed_config_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("model two-state\n")
        assert entry(["estimate", "--config", str(cfg)]) == 2
        assert "key = value" in capsys.readouterr().err

    def test_missing_config_rejected(self):
        assert entry(["estimate", "--config", "/nonexistent.cfg"]) == 2

    def test_unparseable_config_value_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("model = two-state\nestimator = reg\nr = ten\n")
        assert entry(["estimate", "--config", str(cfg)]) == 2


class TestPlan:
    def test_standard_example(self, tmp_path):
        code, text = run_cli(
            "plan", "--model", "two-state", "--beta", "0.5",
            "--eps", "0.1", "--alpha", "0.05", out=tmp_path / "plan.txt",
        )
        assert code == 0
        values = dict(
            line.split(" = ") for line in text.splitlines()
            if not line.startswith("#") and " = " in line
        )
        assert values["n"] == "630"
        assert values["l"] == "7"
        assert float(values["expected_cost"]) == 4431.0
        assert float(values["clt_n"]) == pytest.approx(288.1, abs=0.05)
        assert "klm_n" in values
        assert "perfect_cost" in values

    def test_manual_inputs(self, tmp_path):
        code, text = run_cli(
            "plan", "--sigma-as-sq", "0.75", "--c0", "3.0",
            "--eps", "0.1", "--alpha", "0.05", out=tmp_path / "plan.txt",
        )
        assert code == 0
        assert "n = 630" in text
        # no model, beta, or f_sup: comparison sizings are absent
        assert "klm_n" not in text
        assert "perfect_cost" not in text

    def test_missing_inputs_rejected(self):
        assert entry(["plan", "--eps", "0.1", "--alpha", "0.05"]) == 2


class TestBounds:
    def test_report_rows(self, tmp_path):
        code, text = run_cli(
            "bounds", "--model", "two-state", "--eps", "0.1",
            "--r", "1000", "--n", "1000", out=tmp_path / "b.csv",
        )
        assert code == 0
        header, columns, rows = parse_csv(text)
        assert columns == ["name", "kind", "value", "value_capped", "inputs"]
        names = {r[0] for r in rows}
        assert {"reg_tail", "unbiased_mse", "regseq_mse"} <= names
        assert any(line.startswith("# oracle_sigma_as_sq = 0.75") for line in header)

    def test_needs_r_or_n(self):
        assert entry(["bounds", "--model", "two-state", "--eps", "0.1"]) == 2


class TestCoverage:
    def test_small_run(self, tmp_path):
        code, text = run_cli(
            "coverage", "--model", "two-state", "--eps", "0.1",
            "--alpha", "0.05", "--meta", "5", "--seed", "3",
            out=tmp_path / "cov.csv",
        )
        assert code == 0
        header, columns, rows = parse_csv(text)
        assert columns == ["meta", "median", "abs_error", "within_eps", "tours", "steps"]
        assert len(rows) == 9  # 5 meta rows + 4 summary rows
        assert {r[0] for r in rows[5:]} == {
            "coverage", "guaranteed_coverage", "mean_steps", "planned_steps"
        }
        assert "# plan_n = 630" in header
        assert "# plan_l = 7" in header

    def test_jobs_do_not_change_bytes(self, tmp_path):
        argv = ("coverage", "--model", "two-state", "--eps", "0.1",
                "--alpha", "0.05", "--meta", "4", "--seed", "3")
        _, serial = run_cli(*argv, out=tmp_path / "a.csv")
        _, pooled = run_cli(*argv, "--jobs", "2", out=tmp_path / "b.csv")
        assert serial == pooled


class TestCompare:
    def test_default_grid(self, tmp_path):
        code, text = run_cli("compare", out=tmp_path / "cmp.csv")
        assert code == 0
        _, columns, rows = parse_csv(text)
        assert columns[0] == "beta"
        assert [r[0] for r in rows] == ["0.05", "0.1", "0.2", "0.3"]

    def test_custom_grid_validated(self):
        assert entry(["compare", "--betas", "0.5,1.5"]) == 2
        assert entry(["compare", "--betas", "abc"]) == 2


class TestVerify:
    def test_quick_suite_passes(self, tmp_path):
        code, text = run_cli("verify", "--tier", "quick", out=tmp_path / "v.txt")
        assert code == 0
        assert "0 failed" in text
        assert "# seed = 1" in text  # default master seed for the suite

    def test_fault_injection_fails_suite(self, tmp_path):
        code, text = run_cli("verify", "--tier", "quick",
                             "--inject-fault", "perturb-q", out=tmp_path / "v.txt")
        assert code == 1
        assert "[FAIL] mode-equivalence" in text

    def test_unknown_tier_rejected(self):
        # argparse rejects the choice itself, exiting with code 2
        with pytest.raises(SystemExit) as exc_info:
            entry(["verify", "--tier", "overnight"])
        assert exc_info.value.code == 2


class TestConsoleScript:
    def test_installed_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "regenmc.cli", "plan", "--model", "two-state",
             "--eps", "0.1", "--alpha", "0.05"],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0
        assert "n = 630" in proc.stdout

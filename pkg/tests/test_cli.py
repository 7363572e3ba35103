import json
import subprocess
import sys

import pytest

from holderbandit.cli import EXIT_CONFIG, EXIT_OK, EXIT_THRESHOLD, main
from holderbandit.harness import FIT_COLUMNS, SUMMARY_COLUMNS, TRACE_COLUMNS, read_csv

BUMP = {"kind": "power_bump", "d": 1, "alpha": 2.0, "x_star": [0.37]}


@pytest.fixture
def write_config(tmp_path):
    def write(obj, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)
    return write


class TestRun:
    def test_writes_trace(self, tmp_path, write_config):
        out = tmp_path / "trace.csv"
        cfg = write_config({"function": BUMP, "horizons": [50, 80], "seeds": [0, 1]})
        assert main(["run", "--config", cfg, "--output", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert list(rows[0]) == TRACE_COLUMNS and len(rows) == 2 * 50 + 2 * 80

    def test_output_from_config(self, tmp_path, write_config):
        out = tmp_path / "from_cfg.csv"
        cfg = write_config({"function": BUMP, "T": 30, "output": str(out)})
        assert main(["run", "--config", cfg]) == EXIT_OK and out.exists()

    def test_unknown_key(self, write_config, capsys):
        cfg = write_config({"function": BUMP, "T": 30, "speed": "fast"})
        assert main(["run", "--config", cfg]) == EXIT_CONFIG
        assert "speed" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["run", "--config", str(path)]) == EXIT_CONFIG

    def test_byte_identical_reruns(self, tmp_path, write_config):
        cfg = write_config({"function": dict(BUMP, x_star="random"), "algorithm": "corral_meta",
                            "horizons": [100], "seeds": 2})
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["run", "--config", cfg, "--output", str(a)])
        main(["run", "--config", cfg, "--output", str(b), "--workers", "2"])
        assert a.read_bytes() == b.read_bytes()


class TestSweepAndRate:
    @pytest.fixture
    def summary(self, tmp_path, write_config):
        out = tmp_path / "summary.csv"
        cfg = write_config({"function": BUMP, "horizons": [128, 256, 512], "seeds": [0, 1],
                            "grid": {"algorithm": ["ucb_meta", "ucb1_bins"]}})
        assert main(["sweep", "--config", cfg, "--output", str(out)]) == EXIT_OK
        return out

    def test_sweep_summary(self, summary):
        rows = read_csv(summary)
        assert list(rows[0]) == SUMMARY_COLUMNS and len(rows) == 2 * 3 * 2

    def test_rate_fits(self, summary, tmp_path):
        out = tmp_path / "fits.csv"
        assert main(["rate", "--input", str(summary), "--group", "algorithm", "--output", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert list(rows[0]) == ["algorithm"] + FIT_COLUMNS
        assert {r["algorithm"] for r in rows} == {"ucb_meta", "ucb1_bins"}

    def test_rate_to_stdout(self, summary, capsys):
        assert main(["rate", "--input", str(summary)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("algorithm,alpha_true,alpha_input,d,slope")

    def test_assert_slope_pass_and_violation(self, summary, tmp_path):
        out = str(tmp_path / "f.csv")
        assert main(["rate", "--input", str(summary), "--output", out, "--assert-slope=-10,10"]) == EXIT_OK
        assert main(["rate", "--input", str(summary), "--output", out, "--assert-slope", "5,6"]) == EXIT_THRESHOLD

    def test_bad_group_key(self, summary):
        assert main(["rate", "--input", str(summary), "--group", "colour"]) == EXIT_CONFIG

    def test_bad_bounds(self, summary):
        assert main(["rate", "--input", str(summary), "--assert-slope", "0.5"]) == EXIT_CONFIG


class TestCompare:
    def test_report(self, tmp_path, write_config, capsys):
        out = tmp_path / "cmp.csv"
        cfg = write_config({"function": BUMP, "horizons": [128, 256, 512], "seeds": [0, 1, 2]})
        assert main(["compare", "--config", cfg, "--output", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert list(rows[0]) == ["seed", "meta_slope", "baseline_slope", "meta_lower"]
        assert [r["seed"] for r in rows] == ["mean", 0, 1, 2]
        assert "paired seeds" in capsys.readouterr().out

    def test_needs_three_horizons(self, write_config):
        cfg = write_config({"function": BUMP, "horizons": [128, 256]})
        assert main(["compare", "--config", cfg]) == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "holderbandit", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "rate" in proc.stdout

"""Command-line surface: exit codes, emitted files, and reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from hlri.cli import main

LINEAR_RUN = {
    "problem": {"benchmark": "linear", "n": 2, "beta_star": 3.0},
    "seed": 7,
}


def write_config(tmp_path: Path, payload: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


class TestRunCommand:
    def test_successful_run_emits_files(self, tmp_path, capsys):
        config = write_config(tmp_path, LINEAR_RUN)
        out = tmp_path / "out"
        assert main(["run", "--config", str(config), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["beta_hl"] == pytest.approx(3.0, abs=0.02)
        header = (out / "history.csv").read_text().splitlines()[0]
        assert header == ("generation,stage,best_fitness,best_beta,"
                          "region_diameter,distinct_fraction,evaluations")
        regions = json.loads((out / "regions.json").read_text())
        assert regions[0]["a_min"] == [-1.0, -1.0]

    def test_invalid_bounds_exit_1(self, tmp_path, capsys):
        config = write_config(tmp_path, {**LINEAR_RUN, "beta_min": 9.0})
        assert main(["run", "--config", str(config), "--out", str(tmp_path)]) == 1
        assert "beta_min" in capsys.readouterr().err

    def test_unknown_key_exit_1(self, tmp_path, capsys):
        config = write_config(tmp_path, {**LINEAR_RUN, "mutation_rate": 0.5})
        assert main(["run", "--config", str(config), "--out", str(tmp_path)]) == 1
        assert "mutation_rate" in capsys.readouterr().err

    def test_unreachable_surface_exit_2(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "linear", "n": 2, "beta_star": 20.0},
            "seed": 0,
            "max_generations": 45,
        })
        out = tmp_path / "out"
        assert main(["run", "--config", str(config), "--out", str(out)]) == 2
        assert not (out / "report.json").exists()
        assert (out / "best_partial.json").exists()

    def test_seed_override_changes_run(self, tmp_path):
        config = write_config(tmp_path, LINEAR_RUN)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(config), "--out", str(out_a)])
        main(["run", "--config", str(config), "--out", str(out_b),
              "--seed", "99"])
        a = json.loads((out_a / "report.json").read_text())
        b = json.loads((out_b / "report.json").read_text())
        assert a["seed"] == 7 and b["seed"] == 99

    def test_byte_identical_reruns(self, tmp_path):
        config = write_config(tmp_path, LINEAR_RUN)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(config), "--out", str(out_a)])
        main(["run", "--config", str(config), "--out", str(out_b)])
        for name in ("report.json", "history.csv", "regions.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_polynomial_problem_from_file(self, tmp_path):
        poly = tmp_path / "g.json"
        poly.write_text(json.dumps({
            "name": "plane",
            "dimension": 2,
            "terms": [{"coefficient": 3.0, "exponents": [0, 0]},
                      {"coefficient": -1.0, "exponents": [1, 0]}],
        }))
        config = write_config(tmp_path, {
            "problem": {"benchmark": "polynomial", "path": "g.json"},
            "seed": 1,
        })
        out = tmp_path / "out"
        assert main(["run", "--config", str(config), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["beta_hl"] == pytest.approx(3.0, abs=0.02)


class TestBenchCommand:
    BENCH = {
        "benchmarks": [
            {"benchmark": "linear", "n": 2, "beta_star": 3.0, "label": "lin2"},
            {"benchmark": "sphere"},
        ],
        "seeds": [0, 2],
    }

    def test_sweep_rows_and_relative_error(self, tmp_path, capsys):
        config = write_config(tmp_path, self.BENCH)
        out = tmp_path / "out"
        assert main(["bench", "--config", str(config), "--out", str(out)]) == 0
        lines = (out / "summary.csv").read_text().splitlines()
        assert len(lines) == 1 + 6            # 2 benchmarks x 3 seeds
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        assert row["benchmark"] == "lin2"
        assert row["status"] == "ok"
        expected = abs(float(row["beta_hl"]) - 3.0) / 3.0
        assert float(row["rel_error"]) == pytest.approx(expected, rel=1e-12)
        table = capsys.readouterr().out
        assert "lin2" in table and "sphere" in table

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        config = write_config(tmp_path, self.BENCH)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["bench", "--config", str(config), "--out", str(out_a),
              "--workers", "1"])
        main(["bench", "--config", str(config), "--out", str(out_b),
              "--workers", "3"])
        assert (out_a / "summary.csv").read_bytes() == \
            (out_b / "summary.csv").read_bytes()

    def test_seed_range_flag(self, tmp_path):
        config = write_config(tmp_path, {**self.BENCH, "seeds": [0, 0]})
        out = tmp_path / "out"
        assert main(["bench", "--config", str(config), "--out", str(out),
                     "--seeds", "3..6"]) == 0
        lines = (out / "summary.csv").read_text().splitlines()
        assert len(lines) == 1 + 8
        seeds = {line.split(",")[1] for line in lines[1:]}
        assert seeds == {"3", "4", "5", "6"}

    def test_cell_failures_do_not_abort(self, tmp_path):
        config = write_config(tmp_path, {
            "benchmarks": [
                {"benchmark": "linear", "n": 2, "beta_star": 3.0, "label": "ok"},
                {"benchmark": "linear", "n": 2, "beta_star": 20.0,
                 "label": "unreachable"},
            ],
            "seeds": [0, 1],
            "max_generations": 45,
        })
        out = tmp_path / "out"
        assert main(["bench", "--config", str(config), "--out", str(out)]) == 0
        lines = (out / "summary.csv").read_text().splitlines()[1:]
        statuses = {line.split(",")[0]: line.split(",")[2] for line in lines}
        assert statuses["ok"] == "ok"
        assert statuses["unreachable"] == "SurfaceNotFoundError"


class TestOracleCommand:
    def test_brute_force_json(self, tmp_path):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "sphere"},
            "method": "brute_force",
            "resolution": 512,
        })
        out = tmp_path / "out"
        assert main(["oracle", "--config", str(config), "--out", str(out)]) == 0
        payload = json.loads((out / "oracle.json").read_text())
        assert payload["beta"] == pytest.approx(3.0, abs=1e-3)
        assert payload["method"] == "brute_force"
        assert "command" in payload

    def test_hlrf_divergence_exit_2(self, tmp_path):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "parabolic", "c": 3.0, "kappa": 2.0},
            "method": "hlrf",
            "y0": [2.0, 0.0],
        })
        assert main(["oracle", "--config", str(config),
                     "--out", str(tmp_path)]) == 2

    def test_closed_form(self, tmp_path):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "gapped"},
            "method": "closed_form",
        })
        out = tmp_path / "out"
        assert main(["oracle", "--config", str(config), "--out", str(out)]) == 0
        payload = json.loads((out / "oracle.json").read_text())
        assert payload["beta"] == 3.5


class TestRepairTraceCommand:
    def test_strong_mode_along_gradient(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "linear", "n": 2, "beta_star": 3.0},
            "direction": [1.0, 0.0],
            "beta0": 0.0,
        })
        out = tmp_path / "out"
        assert main(["repair-trace", "--config", str(config),
                     "--out", str(out)]) == 0
        summary = json.loads((out / "repair.json").read_text())
        assert summary["status"] == "total"
        assert summary["mode"] == "strong"
        lines = (out / "trace.csv").read_text().splitlines()
        assert lines[0] == "k,beta,g,delta_beta,delta_max"
        assert len(lines) == summary["iterations"] + 2

    def test_orthogonal_direction_reports_no_surface(self, tmp_path):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "linear", "n": 2, "beta_star": 3.0},
            "direction": [0.0, 1.0],
        })
        out = tmp_path / "out"
        assert main(["repair-trace", "--config", str(config),
                     "--out", str(out)]) == 0
        summary = json.loads((out / "repair.json").read_text())
        assert summary["status"] in ("partial", "no_surface")

    def test_weak_mode_with_large_amplitude(self, tmp_path):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "polynomial", "dimension": 2,
                        "terms": [
                            {"coefficient": 3.0, "exponents": [0, 0]},
                            {"coefficient": -3.0, "exponents": [3, 0]}],
                        "name": "cubic"},
            "direction": [1.0, 0.0],
            "repair": {"alpha": 0.7},
        })
        out = tmp_path / "out"
        assert main(["repair-trace", "--config", str(config),
                     "--out", str(out)]) == 0
        summary = json.loads((out / "repair.json").read_text())
        assert summary["mode"] == "weak"

    def test_non_unit_direction_exit_1(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "linear", "n": 2, "beta_star": 3.0},
            "direction": [1.0, 1.0],
        })
        assert main(["repair-trace", "--config", str(config),
                     "--out", str(tmp_path)]) == 1
        assert "unit vector" in capsys.readouterr().err


class TestValidateConfig:
    def test_valid_run_config(self, tmp_path, capsys):
        config = write_config(tmp_path, LINEAR_RUN)
        assert main(["validate-config", "--config", str(config)]) == 0
        assert "valid run config" in capsys.readouterr().out

    def test_valid_bench_config(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "benchmarks": [{"benchmark": "sphere"}], "seeds": [0, 1]})
        assert main(["validate-config", "--config", str(config)]) == 0
        assert "valid bench config" in capsys.readouterr().out

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate-config", "--config", str(path)]) == 1

    def test_unknown_benchmark_parameter(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "problem": {"benchmark": "sphere", "radius": 1.0, "sides": 4}})
        assert main(["validate-config", "--config", str(config)]) == 1
        assert "sides" in capsys.readouterr().err

import json
import sys
from pathlib import Path

import pytest

from mergebbo.cli import main

ECHO_CMD = f"{sys.executable} {Path(__file__).parent / 'helpers' / 'echo_evaluator.py'}"


class TestRun:
    def test_run_writes_log(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--objective", "toy-merge",
                "--strategy", "structured",
                "--budget", "10",
                "--seed", "0",
                "--space", "2,4",
                "--out", str(tmp_path),
            ]
        )
        assert code == 0
        log_path = tmp_path / "structured-seed0.jsonl"
        assert log_path.exists()
        assert len(log_path.read_text().strip().splitlines()) == 10
        meta = json.loads((tmp_path / "structured-seed0.jsonl.meta.json").read_text())
        assert meta["budget"] == 10

    def test_run_with_external_evaluator(self, tmp_path):
        code = main(
            [
                "run",
                "--strategy", "unstructured",
                "--budget", "5",
                "--seed", "1",
                "--space", "2,2",
                "--out", str(tmp_path),
                "--evaluator-cmd", ECHO_CMD,
            ]
        )
        assert code == 0
        assert (tmp_path / "unstructured-seed1.jsonl").exists()

    def test_unknown_objective_exits_2(self, tmp_path):
        code = main(
            ["run", "--objective", "mnist", "--out", str(tmp_path), "--space", "2,4"]
        )
        assert code == 2

    def test_evaluator_failure_exits_3(self, tmp_path):
        code = main(
            [
                "run",
                "--strategy", "unstructured",
                "--budget", "5",
                "--seed", "0",
                "--space", "2,2",
                "--out", str(tmp_path),
                "--evaluator-cmd", ECHO_CMD + " --fail-at 2",
            ]
        )
        assert code == 3
        partial = tmp_path / "unstructured-seed0-partial.jsonl"
        assert partial.exists()
        assert len(partial.read_text().strip().splitlines()) == 2

    def test_bad_space_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["run", "--space", "2x4", "--out", str(tmp_path)])
        assert excinfo.value.code == 2


class TestCompare:
    def test_default_four_conditions(self, tmp_path, capsys):
        code = main(
            [
                "compare",
                "--objective", "toy-merge",
                "--budget", "10",
                "--seeds", "0",
                "--space", "2,4",
                "--out", str(tmp_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "Method" in out and "Best Accuracy" in out and "Evaluations" in out
        assert "N/A" in out
        exp_dirs = list(tmp_path.glob("exp-*"))
        assert len(exp_dirs) == 1
        assert (exp_dirs[0] / "report.json").exists()
        assert (exp_dirs[0] / "traces" / "structured-active.csv").exists()

    def test_json_format(self, tmp_path, capsys):
        code = main(
            [
                "compare",
                "--objective", "toy-merge",
                "--budget", "4",
                "--seeds", "0,1",
                "--space", "2,4",
                "--out", str(tmp_path),
                "--format", "json",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        payload = json.loads(out[: out.rindex("}") + 1])
        assert [r["evaluations"] for r in payload["rows"]] == ["N/A", 1, 4, 4]

    def test_masked_sphere_with_search_conditions(self, tmp_path):
        code = main(
            [
                "compare",
                "--objective", "masked-sphere",
                "--budget", "6",
                "--seeds", "0",
                "--space", "2,4",
                "--out", str(tmp_path),
                "--conditions", "unstructured,structured,conditional",
            ]
        )
        assert code == 0

    def test_baseline_on_masked_sphere_exits_2(self, tmp_path):
        code = main(
            [
                "compare",
                "--objective", "masked-sphere",
                "--budget", "6",
                "--seeds", "0",
                "--space", "2,4",
                "--out", str(tmp_path),
            ]
        )
        assert code == 2


class TestReport:
    def test_rerender_from_saved_experiment(self, tmp_path, capsys):
        main(
            [
                "compare",
                "--objective", "toy-merge",
                "--budget", "6",
                "--seeds", "0",
                "--space", "2,4",
                "--out", str(tmp_path),
            ]
        )
        capsys.readouterr()
        exp_dir = next(tmp_path.glob("exp-*"))
        code = main(["report", "--dir", str(exp_dir), "--format", "csv"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "method,best_accuracy,evaluations"

    def test_missing_dir_exits_2(self, tmp_path):
        code = main(["report", "--dir", str(tmp_path / "nope")])
        assert code == 2


class TestBench:
    def test_suite_sweep_smoke(self, capsys):
        code = main(["bench", "--sizes", "8", "--budget-multiplier", "2", "--seeds", "0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "masked-sphere" in out and "toy-merge" in out

    def test_kernel_timing_smoke(self, capsys):
        code = main(["bench", "--kernels"])
        assert code == 0
        assert "kernel backends" in capsys.readouterr().out

import sys
from pathlib import Path

import numpy as np
import pytest

from eeihv.cli import main
from eeihv.rundir import read_csv

SMALL = """seed: {seed}
objective: synthetic-2d
noise: 0.01
n_init: 8
n_max: {n_max}
n_restarts: 3
gp_restarts: 2
n_samples: 10
n_candidates: 50
grid_resolution: 16
attainment_every: 2
"""


def write_config(tmp_path, name="run.yaml", seed=5, n_max=11, extra=""):
    path = tmp_path / name
    path.write_text(SMALL.format(seed=seed, n_max=n_max) + extra)
    return path


class TestRunCommand:
    def test_zero_budget(self, tmp_path, capsys):
        out = tmp_path / "zero"
        assert main(["run", str(write_config(tmp_path, n_max=8)), "--out", str(out)]) == 0
        assert sorted(p.name for p in (out / "history").iterdir()) == ["iter_0000.state"]
        assert (out / "config.snapshot").exists()
        header, rows = read_csv(out / "exports" / "trace.csv")
        assert header[:5] == ["iteration", "n", "eeihv", "accepted", "stop_reason"]
        assert rows == [["0", "8", "", "0", "budget", "", "", "", ""]]
        for name in ("front.csv", "attainment.csv", "deviation.csv", "denoised.csv", "vorobev.csv"):
            assert (out / "exports" / name).exists()

    def test_same_seed_same_trace(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["run", str(cfg), "--out", str(tmp_path / "a")]) == 0
        assert main(["run", str(cfg), "--out", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "exports" / "trace.csv").read_bytes()
        b = (tmp_path / "b" / "exports" / "trace.csv").read_bytes()
        assert a == b
        assert len(a.splitlines()) == 1 + 4

    def test_report_regenerates(self, tmp_path, capsys):
        out = tmp_path / "r"
        main(["run", str(write_config(tmp_path)), "--out", str(out)])
        before = {p.name: p.read_bytes() for p in (out / "exports").iterdir()}
        for p in (out / "exports").iterdir():
            p.unlink()
        assert main(["report", str(out)]) == 0
        after = {p.name: p.read_bytes() for p in (out / "exports").iterdir()}
        assert before == after

    def test_round_trip_float_format(self, tmp_path):
        out = tmp_path / "f"
        main(["run", str(write_config(tmp_path)), "--out", str(out)])
        _, rows = read_csv(out / "exports" / "denoised.csv")
        from eeihv.rundir import load_history

        final = load_history(out)[-1]
        parsed = np.array([[float(v) for v in row] for row in rows])
        np.testing.assert_array_equal(parsed[:, -2:], final.denoised)

    def test_resume(self, tmp_path):
        out = tmp_path / "res"
        cfg = write_config(tmp_path)
        main(["run", str(cfg), "--out", str(out)])
        full = (out / "exports" / "trace.csv").read_bytes()
        for p in sorted((out / "history").iterdir())[2:]:
            p.unlink()
        assert main(["run", str(cfg), "--out", str(out), "--resume"]) == 0
        assert (out / "exports" / "trace.csv").read_bytes() == full

    def test_external_command(self, tmp_path):
        echo = Path(__file__).with_name("child_echo.py")
        extra = f"command: [{sys.executable!r}, {str(echo)!r}, '2']\ndim: 2\nlower: [7.2, 0.0]\nupper: [7.5, 2.0]\n"
        text = SMALL.format(seed=1, n_max=9).replace("objective: synthetic-2d\n", "") + extra
        (tmp_path / "ext.yaml").write_text(text)
        assert main(["run", str(tmp_path / "ext.yaml"), "--out", str(tmp_path / "ext")]) == 0
        _, rows = read_csv(tmp_path / "ext" / "exports" / "denoised.csv")
        x1, y1 = float(rows[0][0]), float(rows[0][2])
        np.testing.assert_allclose(y1, 7.2 + 0.3 * x1)

    def test_failing_objective_exit_code(self, tmp_path, capsys):
        child = Path(__file__).with_name("child_scripted.py")
        extra = f"command: [{sys.executable!r}, {str(child)!r}, '--error', '8', '--error', '9']\ndim: 3\n"
        text = SMALL.format(seed=1, n_max=12).replace("objective: synthetic-2d\n", "") + extra
        (tmp_path / "bad.yaml").write_text(text)
        assert main(["run", str(tmp_path / "bad.yaml"), "--out", str(tmp_path / "bad")]) == 3
        assert "mesh failed" in capsys.readouterr().err
        header, rows = read_csv(tmp_path / "bad" / "exports" / "trace.csv")
        assert rows[-1][4] == "evaluation-failure"


class TestErrors:
    def test_report_missing_directory(self, tmp_path, capsys):
        assert main(["report", str(tmp_path / "nowhere")]) != 0
        assert "run directory not found" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("seed: 1\nobjective: synthetic-2d\nbogus: 3\n")
        assert main(["run", str(path), "--out", str(tmp_path / "x")]) == 1
        assert "line 3" in capsys.readouterr().err

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


class TestUtilities:
    def test_benchmark_point(self, capsys):
        assert main(["benchmark", "synthetic-2d", "--seed", "0", "--x", str(1 / 3), "0"]) == 0
        o1 = float(capsys.readouterr().out.split()[0])
        np.testing.assert_allclose(o1, -56 + 10 / (8 * np.pi))

    def test_benchmark_wrong_dimension(self, capsys):
        assert main(["benchmark", "synthetic-6d", "--seed", "0", "--x", "0.5"]) == 1

    def test_ground_truth(self, tmp_path):
        out = tmp_path / "gt.csv"
        assert main(["benchmark", "synthetic-2d", "--seed", "1", "--ground-truth", "--n-designs", "200", "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["x_1", "x_2", "o_1", "o_2"] and rows

    def test_oracles(self, tmp_path, capsys):
        pts = tmp_path / "front.csv"
        pts.write_text("1,2\n2,1\n")
        assert main(["oracle", "hypervolume", str(pts), "--ref", "0", "0"]) == 0
        lines = dict(line.split() for line in capsys.readouterr().out.splitlines())
        assert float(lines["exact"]) == 3.0
        assert abs(float(lines["grid"]) - 3.0) <= float(lines["bound"])
        assert main(["oracle", "eihv", str(pts), "--ref", "0", "0", "--mu", "1.5", "1.5", "--sigma", "0.5", "0.5", "--draws", "100000"]) == 0
        lines = dict(line.split() for line in capsys.readouterr().out.splitlines())
        assert abs(float(lines["closed_form"]) - float(lines["monte_carlo"])) <= 4 * float(lines["std_error"])

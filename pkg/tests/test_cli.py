import csv
import json

import numpy as np
import pytest

from citest.cli import main

from dot_checker import parse_dot


@pytest.fixture
def independent_csv(tmp_path):
    rng = np.random.default_rng(41)
    path = tmp_path / "ind.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b", "c"])
        for _ in range(150):
            writer.writerow([repr(float(v)) for v in rng.normal(size=3)])
    return path


@pytest.fixture
def dependent_csv(tmp_path):
    rng = np.random.default_rng(42)
    path = tmp_path / "dep.csv"
    x = rng.normal(size=250)
    z = rng.normal(size=250)
    y = 1.4 * x + 0.5 * z + 0.3 * rng.normal(size=250)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z"])
        for row in zip(x, y, z):
            writer.writerow([repr(float(v)) for v in row])
    return path


def run(args):
    return main([str(a) for a in args])


class TestTestCommand:
    def test_independent_verdict(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--z", "c", "--method", "none", "--seed", "3"])
        out, err = capsys.readouterr()
        assert code == 0
        doc = json.loads(out)
        assert doc["independent"] is True
        assert doc["seed"] == 3
        assert err.startswith("independent")

    def test_dependent_verdict_exits_zero(self, dependent_csv, capsys):
        code = run(["test", "--data", dependent_csv, "--x", "x", "--y", "y",
                    "--method", "none", "--seed", "3"])
        out, err = capsys.readouterr()
        assert code == 0
        doc = json.loads(out)
        assert doc["independent"] is False
        assert doc["overall_p"] <= 0.05
        assert err.startswith("dependent")

    def test_out_file_holds_json_and_stdout_the_verdict(
        self, independent_csv, tmp_path, capsys
    ):
        out_path = tmp_path / "res.json"
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--method", "none", "--out", out_path])
        out, _ = capsys.readouterr()
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["command"] == "test"
        assert "independent" in out

    def test_json_echoes_configuration(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--alpha", "0.1", "--parametric", "--no-symmetric",
                    "--losses", "absolute,quantile:0.9", "--method", "none",
                    "--seed", "12"])
        out, _ = capsys.readouterr()
        assert code == 0
        echo = json.loads(out)["config_echo"]
        assert echo["alpha"] == 0.1
        assert echo["parametric"] is True
        assert echo["symmetric"] is False
        assert echo["regression_loss"] == "absolute"
        assert echo["loss_battery"] == ["quantile:0.9"]
        assert echo["learners"]["method"] == "none"

    def test_parallel_arrays_align(self, dependent_csv, capsys):
        code = run(["test", "--data", dependent_csv, "--x", "x", "--y", "y",
                    "--z", "z", "--method", "none", "--seed", "0"])
        out, _ = capsys.readouterr()
        doc = json.loads(out)
        n = len(doc["targets"])
        assert code == 0
        assert len(doc["raw_p"]) == n
        assert len(doc["adjusted_p"]) == n
        assert len(doc["loss_stats"]) == n
        for raw, adj in zip(doc["raw_p"], doc["adjusted_p"]):
            assert raw <= adj + 1e-15

    def test_missing_column_exits_two(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a",
                    "--y", "nope", "--method", "none"])
        _, err = capsys.readouterr()
        assert code == 2
        assert "nope" in err

    def test_overlapping_blocks_exit_two(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--z", "a", "--method", "none"])
        _, err = capsys.readouterr()
        assert code == 2
        assert "'a'" in err

    def test_missing_file_exits_two(self, tmp_path, capsys):
        code = run(["test", "--data", tmp_path / "none.csv", "--x", "a",
                    "--y", "b"])
        _, err = capsys.readouterr()
        assert code == 2
        assert "error" in err

    def test_bad_loss_token_exits_two(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--losses", "banana"])
        _, err = capsys.readouterr()
        assert code == 2
        assert "banana" in err

    def test_bad_seed_exits_two(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--seed", "-4"])
        capsys.readouterr()
        assert code == 2

    def test_random_seed_is_echoed(self, independent_csv, capsys):
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--method", "none", "--seed", "random"])
        out, _ = capsys.readouterr()
        assert code == 0
        assert isinstance(json.loads(out)["seed"], int)

    def test_byte_identical_across_runs(self, dependent_csv, capsys):
        args = ["test", "--data", dependent_csv, "--x", "x", "--y", "y",
                "--z", "z", "--seed", "9", "--method", "none"]
        assert run(args) == 0
        first = capsys.readouterr()
        assert run(args) == 0
        second = capsys.readouterr()
        assert first.out == second.out

    def test_config_file_flags_override(self, independent_csv, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "alpha": 0.2,
            "seed": 5,
            "parametric": True,
            "learners": {"method": "none",
                         "regressors": [{"family": "elastic_net"}]},
        }))
        code = run(["test", "--data", independent_csv, "--x", "a", "--y", "b",
                    "--config", cfg, "--alpha", "0.01"])
        out, _ = capsys.readouterr()
        assert code == 0
        echo = json.loads(out)["config_echo"]
        assert echo["alpha"] == 0.01  # flag wins
        assert echo["parametric"] is True  # file value survives
        assert json.loads(out)["seed"] == 5

    def test_schema_override(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        rng = np.random.default_rng(7)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["g", "y"])
            for _ in range(80):
                writer.writerow([int(rng.integers(0, 2)), repr(float(rng.normal()))])
        schema = tmp_path / "schema.json"
        schema.write_text(json.dumps({"g": "categorical"}))
        code = run(["test", "--data", path, "--schema", schema, "--x", "g",
                    "--y", "y", "--method", "none", "--seed", "0"])
        out, _ = capsys.readouterr()
        assert code == 0
        targets = json.loads(out)["targets"]
        losses = {t["target"]: t["loss"] for t in targets}
        assert losses["g"] == "log"


class TestSkeletonCommand:
    def test_json_and_dot_outputs(self, tmp_path, capsys):
        rng = np.random.default_rng(33)
        path = tmp_path / "sk.csv"
        a = rng.normal(size=400)
        b = 0.9 * a + 0.4 * rng.normal(size=400)
        c = rng.normal(size=400)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a", "b", "c"])
            for row in zip(a, b, c):
                writer.writerow([repr(float(v)) for v in row])
        dot_path = tmp_path / "g.dot"
        code = run(["skeleton", "--data", path, "--method", "none",
                    "--seed", "2", "--dot", dot_path])
        out, err = capsys.readouterr()
        assert code == 0
        doc = json.loads(out)
        assert doc["variables"] == ["a", "b", "c"]
        assert ["a", "b"] in doc["edges"]
        assert doc["p_matrix"][0][0] is None  # NaN diagonal -> null
        name, nodes, edges = parse_dot(dot_path.read_text())
        assert nodes == ["a", "b", "c"]
        assert ("a", "b") in {(e[0], e[1]) for e in edges}
        assert "edge(s)" in err

    def test_thread_byte_identity(self, tmp_path, capsys):
        rng = np.random.default_rng(34)
        path = tmp_path / "sk2.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a", "b", "c"])
            for _ in range(200):
                writer.writerow([repr(float(v)) for v in rng.normal(size=3)])
        base = ["skeleton", "--data", path, "--method", "none", "--seed", "4"]
        assert run(base + ["--threads", "1"]) == 0
        first = capsys.readouterr()
        assert run(base + ["--threads", "8"]) == 0
        second = capsys.readouterr()
        assert first.out == second.out


class TestBenchCommand:
    def test_reports_written(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code = run(["bench", "--experiment", "fdr", "--n-grid", "200",
                    "--reps", "2", "--graph-p", "4", "--method", "none",
                    "--seed", "1", "--out", out])
        capsys.readouterr()
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["experiment"] == "fdr"
        assert len(doc["runs"]) == 2
        assert doc["runs"][0]["time_ms"] is None
        csv_path = tmp_path / "bench.csv"
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["seed", "n", "method", "power", "fdr", "time_ms"]
        assert len(rows) == 3
        assert all(row[5] == "" for row in rows[1:])
        png = (tmp_path / "bench.png").read_bytes()
        assert png[:8] == b"\x89PNG\r\n\x1a\n"

    def test_timings_flag_fills_times(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code = run(["bench", "--experiment", "power", "--n-grid", "100",
                    "--reps", "1", "--method", "none", "--seed", "1",
                    "--timings", "--out", out])
        capsys.readouterr()
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["runs"][0]["time_ms"] > 0.0
        with open(tmp_path / "bench.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert float(rows[1][5]) > 0.0

    def test_requires_out(self, capsys):
        code = run(["bench", "--experiment", "power", "--n-grid", "100",
                    "--reps", "1", "--method", "none"])
        _, err = capsys.readouterr()
        assert code == 2
        assert "--out" in err

    def test_byte_identity_across_runs_and_threads(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        base = ["bench", "--experiment", "power", "--n-grid", "80,120",
                "--reps", "2", "--method", "none", "--seed", "7",
                "--out", out]
        assert run(base) == 0
        capsys.readouterr()
        blobs = [(out.read_bytes(), (tmp_path / "bench.csv").read_bytes(),
                  (tmp_path / "bench.png").read_bytes())]
        assert run(base + ["--threads", "8"]) == 0
        capsys.readouterr()
        blobs.append((out.read_bytes(), (tmp_path / "bench.csv").read_bytes(),
                      (tmp_path / "bench.png").read_bytes()))
        assert blobs[0] == blobs[1]

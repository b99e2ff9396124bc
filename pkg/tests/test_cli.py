"""Command-line surface: outputs, schemas, exit codes, manifest replay."""

import json
import os

import numpy as np
import pytest

from polarlasso.cli import main


def run(argv):
    return main(argv)


@pytest.fixture()
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    assert run(["gen", "--n", "4", "--p", "7", "--seed", "1", "--out", str(path)]) == 0
    return str(path)


class TestGen:
    def test_writes_schema(self, problem_file):
        with open(problem_file) as fh:
            payload = json.load(fh)
        assert payload["n"] == 4 and payload["p"] == 7
        assert len(payload["A"]) == 28
        assert len(payload["y"]) == 4
        assert payload["seed"] == 1

    def test_manifest_next_to_output(self, problem_file):
        manifest = problem_file.replace(".json", ".manifest.json")
        assert os.path.exists(manifest)
        with open(manifest) as fh:
            m = json.load(fh)
        assert m["command"] == "gen"
        assert m["seed"] == 1

    def test_y_norm_flag(self, tmp_path):
        path = tmp_path / "p.json"
        assert run(["gen", "--n", "4", "--p", "7", "--seed", "2",
                    "--y-norm", "2.0", "--out", str(path)]) == 0
        with open(path) as fh:
            payload = json.load(fh)
        assert np.linalg.norm(payload["y"]) == pytest.approx(2.0)


class TestSolve:
    def test_zero_observation_both_methods(self, tmp_path, problem_file):
        out = tmp_path / "sol.json"
        assert run(["solve", "--problem", problem_file, "--method", "both",
                    "--n-samples", "2000", "--seed", "3", "--out", str(out)]) == 0
        with open(out) as fh:
            sol = json.load(fh)
        assert sol["fista"]["x"] == [0.0] * 7
        assert sol["polar"]["x"] == [0.0] * 7

    def test_missing_problem_exit_code(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["solve", "--problem", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "s.json")])
        assert exc.value.code == 4


class TestPartition:
    def test_polar_output_schema(self, tmp_path, problem_file):
        out = tmp_path / "z.json"
        assert run(["partition", "--problem", problem_file, "--method", "polar",
                    "--n-samples", "3000", "--seed", "4", "--out", str(out)]) == 0
        with open(out) as fh:
            est = json.load(fh)
        assert set(est) >= {"z", "std_err", "z_min", "z_max", "method"}
        assert est["z_min"] <= est["z"] <= est["z_max"]
        assert est["method"] == "polar_mc"

    def test_both_methods_nested(self, tmp_path, problem_file):
        out = tmp_path / "zb.json"
        assert run(["partition", "--problem", problem_file, "--method", "both",
                    "--n-samples", "2000", "--seed", "4", "--out", str(out)]) == 0
        with open(out) as fh:
            z = json.load(fh)
        assert z["polar"]["method"] == "polar_mc"
        assert z["naive"]["method"] == "naive_mc"

    def test_shift_route(self, tmp_path, problem_file):
        out = tmp_path / "zs.json"
        assert run(["partition", "--problem", problem_file, "--method", "polar",
                    "--n-samples", "2000", "--seed", "5", "--shift",
                    "--out", str(out)]) == 0
        with open(out) as fh:
            z = json.load(fh)
        via_shift = z["shift"]["z_from_shift"]
        assert via_shift == pytest.approx(z["z"], rel=0.2)  # independent sweeps


class TestCurves:
    def test_columns_and_flag(self, tmp_path):
        out = tmp_path / "curves.csv"
        assert run(["curves", "--beta-min", "6", "--beta-max", "45",
                    "--steps", "100", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "beta,phi_beta,phi_beta_M,remainder_bound,mode_times_l1,phi_beta_trusted"
        assert len(lines) == 101
        rows = [line.split(",") for line in lines[1:]]
        flags = {float(r[0]): int(r[5]) for r in rows}
        assert all(flag == 0 for b, flag in flags.items() if b > 13.8)
        assert all(flag == 1 for b, flag in flags.items() if b <= 13.8)
        # mode scale column is monotone toward p - 1 = 6
        scale = [float(r[4]) for r in rows]
        assert all(b > a for a, b in zip(scale, scale[1:]))
        assert scale[-1] == pytest.approx(6.0, rel=1e-2)

    def test_bad_range_exit_code(self, tmp_path):
        code = run(["curves", "--beta-min", "10", "--beta-max", "5",
                    "--out", str(tmp_path / "c.csv")])
        assert code == 2


class TestDiagnose:
    def test_summary_and_series(self, tmp_path, problem_file):
        out = tmp_path / "diag.json"
        series = tmp_path / "series.csv"
        assert run(["diagnose", "--problem", problem_file, "--sampler", "rw",
                    "--iters", "2000", "--seed", "6", "--emit-series", str(series),
                    "--out", str(out)]) == 0
        with open(out) as fh:
            summary = json.load(fh)
        assert set(summary) >= {"first_hit", "last_violation", "satisfaction_rate",
                                "mean", "mean_norm", "acceptance_rate", "tv_constant"}
        assert 0.0 <= summary["satisfaction_rate"] <= 1.0
        lines = series.read_text().splitlines()
        assert lines[0] == "t,norm_x,q_times_r_theta,criterion"
        assert len(lines) == 2001

    def test_is_sampler_has_tv_constant(self, tmp_path, problem_file):
        out = tmp_path / "diag_is.json"
        assert run(["diagnose", "--problem", problem_file, "--sampler", "is",
                    "--iters", "1000", "--seed", "7", "--z-samples", "2000",
                    "--out", str(out)]) == 0
        with open(out) as fh:
            summary = json.load(fh)
        assert summary["tv_constant"] is not None
        assert 0.0 < summary["tv_constant"] < 1.0


class TestTables:
    def test_all_three_tables(self, tmp_path):
        out_dir = tmp_path / "tables"
        assert run(["tables", "--out-dir", str(out_dir), "--seed", "1",
                    "--n-samples", "4000", "--iters", "4000"]) == 0
        t2 = (out_dir / "table2.csv").read_text().splitlines()
        assert t2[0] == "q,P"
        assert t2[1] == "2,0.6672"
        assert t2[5] == "4,0.9999"
        assert t2[7] == "5,1.0000"
        t1 = (out_dir / "table1.csv").read_text().splitlines()
        assert len(t1) == 3 and t1[1].startswith("fista,")
        t3 = (out_dir / "table3.csv").read_text().splitlines()
        assert len(t3) == 3
        assert {row.split(",")[0] for row in t3[1:]} == {"is", "rw"}


class TestManifestReplay:
    def test_byte_identical_rerun(self, tmp_path):
        first = tmp_path / "a" / "curves.csv"
        os.makedirs(first.parent)
        assert run(["curves", "--beta-min", "6", "--beta-max", "20",
                    "--steps", "50", "--out", str(first)]) == 0
        blob = first.read_bytes()
        manifest = str(first).replace(".csv", ".manifest.json")
        first.unlink()
        assert run(["rerun", manifest]) == 0
        assert first.read_bytes() == blob

    def test_seeded_rerun_partition(self, tmp_path, problem_file):
        out = tmp_path / "z.json"
        assert run(["partition", "--problem", problem_file, "--n-samples", "2000",
                    "--seed", "9", "--out", str(out)]) == 0
        blob = out.read_bytes()
        manifest = str(out).replace(".json", ".manifest.json")
        out.unlink()
        assert run(["rerun", manifest]) == 0
        assert out.read_bytes() == blob

"""End-to-end command tests: schemas, worked examples, precedence, determinism."""

import csv
import io
import json
import math
import re

import numpy as np
import pytest

from dqwalk.cli import RunConfig, figure_frames, main, render_figures

BINOMIAL_T4 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


class TestDistribution:
    def test_classical_binomial(self, capsys):
        code, out, _ = run_cli(capsys, "distribution", "--p", "1", "--t", "4")
        header, rows = parse_csv(out)
        assert code == 0
        assert header == ["t", "x", "probability", "method"]
        assert [r[1] for r in rows] == ["-4", "-2", "0", "2", "4"]
        assert all(r[0] == "4" and r[3] == "renewal" for r in rows)
        probs = np.array([float(r[2]) for r in rows])
        assert np.max(np.abs(probs - BINOMIAL_T4)) < 1e-12

    def test_pure_walk_coin_right(self, capsys):
        _, out, _ = run_cli(
            capsys, "distribution", "--p", "0", "--t", "2", "--initial", "right"
        )
        _, rows = parse_csv(out)
        table = {int(r[1]): float(r[2]) for r in rows}
        assert table == pytest.approx({-2: 0.25, 0: 0.5, 2: 0.25}, abs=1e-14)

    def test_rows_sum_to_one(self, capsys):
        _, out, _ = run_cli(capsys, "distribution", "--p", "0.37", "--t", "9")
        _, rows = parse_csv(out)
        assert abs(math.fsum(float(r[2]) for r in rows) - 1.0) < 1e-12

    def test_methods_agree(self, capsys):
        laws = {}
        for method in ("renewal", "superop", "oracle"):
            _, out, _ = run_cli(
                capsys, "distribution", "--p", "0.5", "--t", "5", "--method", method
            )
            _, rows = parse_csv(out)
            laws[method] = np.array([float(r[2]) for r in rows])
            assert all(r[3] == method for r in rows)
        assert np.max(np.abs(laws["oracle"] - laws["renewal"])) < 1e-12
        assert np.max(np.abs(laws["superop"] - laws["renewal"])) < 1e-12

    def test_mc_method_reproducible_and_echoes_seed(self, capsys):
        args = (
            "distribution", "--method", "mc", "--p", "0.5", "--t", "20",
            "--samples", "3000", "--seed", "4242",
        )
        _, out_one, err_one = run_cli(capsys, *args)
        _, out_two, _ = run_cli(capsys, *args)
        assert out_one == out_two
        assert "seed=4242" in err_one
        _, rows = parse_csv(out_one)
        assert abs(math.fsum(float(r[2]) for r in rows) - 1.0) < 1e-12

    def test_float_cells_round_trip(self, capsys):
        _, out, _ = run_cli(capsys, "distribution", "--p", "0.5", "--t", "7")
        _, rows = parse_csv(out)
        for row in rows:
            assert f"{float(row[2]):.17g}" == row[2]


class TestMoments:
    def test_classical_columns(self, capsys):
        _, out, _ = run_cli(capsys, "moments", "--p", "1", "--t", "20")
        _, rows = parse_csv(out)
        assert len(rows) == 20
        for row in rows:
            t = float(row[0])
            assert abs(float(row[2]) - t) < 1e-10  # var_exact
            assert float(row[4]) == t  # var_formula
            assert abs(float(row[1])) < 1e-12 and float(row[3]) == 0.0

    def test_variance_gap_at_reference_point(self, capsys):
        _, out, _ = run_cli(capsys, "moments", "--p", "0.3", "--t", "300")
        _, rows = parse_csv(out)
        last = rows[-1]
        assert last[0] == "300"
        assert abs(float(last[2]) - float(last[4])) < 1e-6

    def test_rejects_p_zero(self, capsys):
        code, _, err = run_cli(capsys, "moments", "--p", "0", "--t", "10")
        assert code == 2
        assert "error:" in err


class TestConverge:
    def test_doubling_schedule_and_monotone_trend(self, capsys):
        _, out, _ = run_cli(capsys, "converge", "--p", "0.5", "--t", "200")
        header, rows = parse_csv(out)
        assert header == ["t", "ks_distance", "cf_error"]
        assert [r[0] for r in rows] == ["25", "50", "100", "200"]
        ks = [float(r[1]) for r in rows]
        cf = [float(r[2]) for r in rows]
        assert ks == sorted(ks, reverse=True)
        assert cf == sorted(cf, reverse=True)

    def test_classical_limit_is_near_normal(self, capsys):
        _, out, _ = run_cli(capsys, "converge", "--p", "1", "--t", "1000")
        _, rows = parse_csv(out)
        assert float(rows[-1][1]) <= 0.02

    def test_rejects_tiny_horizon(self, capsys):
        code, _, err = run_cli(capsys, "converge", "--t", "4")
        assert code == 2 and "t >= 8" in err


class TestFigures:
    def test_files_and_reference_values(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "figures", "--out", str(tmp_path))
        assert code == 0
        for stem in ("fig1", "fig2", "fig3"):
            assert (tmp_path / f"{stem}.csv").exists()
            assert (tmp_path / f"{stem}.png").stat().st_size > 0
        assert err.count("wrote") == 6

        with (tmp_path / "fig1.csv").open(newline="") as fh:
            fig1 = list(csv.DictReader(fh))
        origin = [r for r in fig1 if r["p"] == "1" and r["x"] == "0"]
        assert len(origin) == 1
        assert float(origin[0]["density"]) == 1.0 / math.sqrt(2.0 * math.pi)

        with (tmp_path / "fig3.csv").open(newline="") as fh:
            fig3 = list(csv.DictReader(fh))
        assert len(fig3) == 100
        t0 = {r["p"]: float(r["t0"]) for r in fig3}
        assert abs(t0["0.01"] - 247.3) < 0.05

    def test_fig2_columns_monotone_where_linear_growth_holds(self, tmp_path):
        render_figures(tmp_path)
        with (tmp_path / "fig2.csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        ps = [float(r["p"]) for r in rows]
        assert ps == sorted(ps) and len(ps) == 100
        for t in (300, 400, 500):
            col = [float(r[f"std_t{t}"]) for r in rows]
            assert all(b <= a for a, b in zip(col, col[1:]))
        # below the crossover time the formula dips before rising: only
        # assert the decreasing trend once p is past the small-p corrections
        col = [float(r["std_t200"]) for r in rows if float(r["p"]) >= 0.05]
        assert all(b <= a for a, b in zip(col, col[1:]))

    def test_reruns_are_bit_identical(self, tmp_path):
        one, two = tmp_path / "one", tmp_path / "two"
        render_figures(one)
        render_figures(two)
        for stem in ("fig1", "fig2", "fig3"):
            assert (one / f"{stem}.csv").read_bytes() == (two / f"{stem}.csv").read_bytes()

    def test_frames_expose_headers(self):
        frames = figure_frames()
        assert frames["fig1"][0] == ["p", "x", "density"]
        assert frames["fig2"][0] == ["p", "std_t200", "std_t300", "std_t400", "std_t500"]
        assert frames["fig3"][0] == ["p", "t0"]


class TestMcCommand:
    def test_echoes_random_seed_when_unset(self, capsys):
        code, out, err = run_cli(capsys, "mc", "--t", "10", "--samples", "500")
        assert code == 0
        assert re.search(r"^seed=\d+$", err, flags=re.M)
        assert "variance=" in err
        header, rows = parse_csv(out)
        assert header == ["t", "x", "frequency", "method"]
        assert abs(math.fsum(float(r[2]) for r in rows) - 1.0) < 1e-12

    def test_fixed_seed_reproduces(self, capsys):
        args = ("mc", "--t", "15", "--samples", "800", "--seed", "31")
        _, out_one, _ = run_cli(capsys, *args)
        _, out_two, _ = run_cli(capsys, *args)
        assert out_one == out_two


class TestConfigAndValidation:
    def test_config_file_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "walk.cfg"
        cfg.write_text("# reference run\np=0.25\nt=6\ninitial=right\n")
        _, from_config, _ = run_cli(
            capsys, "distribution", "--config", str(cfg), "--t", "4"
        )
        _, from_flags, _ = run_cli(
            capsys, "distribution", "--p", "0.25", "--t", "4", "--initial", "right"
        )
        assert from_config == from_flags
        _, rows = parse_csv(from_config)
        assert all(r[0] == "4" for r in rows)  # CLI --t beat the config value

    def test_config_rejects_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "walk.cfg"
        cfg.write_text("probability=0.5\n")
        code, _, err = run_cli(capsys, "distribution", "--config", str(cfg))
        assert code == 2 and "unknown key" in err

    def test_config_rejects_malformed_line(self, tmp_path, capsys):
        cfg = tmp_path / "walk.cfg"
        cfg.write_text("just-a-word\n")
        code, _, err = run_cli(capsys, "distribution", "--config", str(cfg))
        assert code == 2 and "key=value" in err

    def test_rejects_p_outside_unit_interval(self, capsys):
        code, _, err = run_cli(capsys, "distribution", "--p", "1.5", "--t", "4")
        assert code == 2 and "error:" in err

    def test_rejects_negative_t(self, capsys):
        code, _, err = run_cli(capsys, "distribution", "--t", "-3")
        assert code == 2 and "error:" in err

    def test_runconfig_validates_fields(self):
        with pytest.raises(ValueError, match="command"):
            RunConfig(command="plot")
        with pytest.raises(ValueError, match="method"):
            RunConfig(command="distribution", method="magic")

    def test_json_mirror_matches_csv(self, capsys):
        _, csv_out, _ = run_cli(capsys, "moments", "--p", "0.5", "--t", "6")
        _, json_out, _ = run_cli(
            capsys, "moments", "--p", "0.5", "--t", "6", "--format", "json"
        )
        _, csv_rows = parse_csv(csv_out)
        json_rows = json.loads(json_out)
        assert len(json_rows) == len(csv_rows) == 6
        for csv_row, json_row in zip(csv_rows, json_rows):
            assert json_row["t"] == int(csv_row[0])
            assert json_row["var_exact"] == float(csv_row[2])

    def test_output_file_written(self, tmp_path, capsys):
        target = tmp_path / "law.csv"
        code, out, _ = run_cli(
            capsys, "distribution", "--p", "0.5", "--t", "4", "--out", str(target)
        )
        assert code == 0 and out == ""
        header, rows = parse_csv(target.read_text())
        assert header == ["t", "x", "probability", "method"] and len(rows) == 5


class TestVerifyCommand:
    def test_fast_subsuite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--fast")
        assert code == 0
        assert "12/12 checks passed (fast sub-suite)" in out
        assert "SKIP" in out and "FAIL" not in out
        assert out.count("PASS") + out.count("SKIP") == 12

"""End-to-end tests of the command-line interface and its file formats."""

import csv
import io
import json
import math

import pytest

from scatterchain.cli import main, parse_cell_spec
import scatterchain as sc


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    return [dict(zip(header, row)) for row in rows[1:]]


class TestCellSpecParsing:
    def test_delta(self):
        cell = parse_cell_spec("delta:g=1.5")
        assert isinstance(cell, sc.DeltaSpike) and cell.g == 1.5

    def test_barrier(self):
        cell = parse_cell_spec("barrier:V0=2,w=1")
        assert isinstance(cell, sc.RectBarrier) and cell.V0 == 2.0 and cell.w == 1.0

    def test_piecewise(self):
        cell = parse_cell_spec("piecewise:0.5:2.0,0.25:-1.0")
        assert isinstance(cell, sc.PiecewiseConstant)
        assert cell.segments == ((0.5, 2.0), (0.25, -1.0))

    @pytest.mark.parametrize(
        "bad",
        ["delta", "delta:q=1", "barrier:V0=2", "piecewise:0.5", "squarewell:V0=1"],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(sc.ConfigError):
            parse_cell_spec(bad)


class TestCellCommand:
    def test_free_cell_transmission_column(self, capsys):
        code, out, _ = run_cli(
            capsys, "cell", "--cell", "delta:g=0", "--k-min", "0.5",
            "--k-max", "1.5", "--k-count", "3",
        )
        assert code == 0
        rows = parse_csv(out)
        assert [row["T"] for row in rows] == ["1", "1", "1"]

    def test_delta_half_transmission(self, capsys):
        code, out, _ = run_cli(
            capsys, "cell", "--cell", "delta:g=1", "--k-min", "1",
            "--k-max", "2", "--k-count", "2",
        )
        rows = parse_csv(out)
        assert float(rows[0]["T"]) == pytest.approx(0.5, abs=1e-12)

    def test_malformed_config_exit_code(self, capsys):
        code, _, err = run_cli(
            capsys, "cell", "--cell", "delta:g=1", "--k-min", "0",
            "--k-max", "2", "--k-count", "5",
        )
        assert code == 2
        assert "k_min" in err

    def test_config_file_with_line_diagnostics(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("cell = delta:g=1\nk_min = 0\nk_max = 2\nk_count = 5\n")
        code, _, err = run_cli(capsys, "cell", "--config", str(config))
        assert code == 2
        assert "run.cfg:2" in err and "k_min" in err

    def test_unknown_config_key(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("cell = delta:g=1\nwavelength = 3\n")
        code, _, err = run_cli(capsys, "cell", "--config", str(config))
        assert code == 2
        assert "unknown key" in err and "wavelength" in err

    def test_flags_override_config(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text(
            "cell = delta:g=0\nk_min = 1\nk_max = 2\nk_count = 2\nformat = json\n"
        )
        code, out, _ = run_cli(
            capsys, "cell", "--config", str(config), "--cell", "delta:g=1"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["meta"]["config"]["cell"] == "delta:g=1"
        assert payload["rows"][0]["T"] == pytest.approx(0.5)

    def test_contract_violation_exit_code(self, capsys):
        code, _, err = run_cli(
            capsys, "cell", "--cell", "delta:g=1", "--k-min", "1",
            "--k-max", "2", "--k-count", "2", "--tol-unitarity", "1e-20",
        )
        assert code == 3
        assert "unitarity" in err


class TestChainCommand:
    def test_dual_path_agreement_column(self, capsys):
        code, out, _ = run_cli(
            capsys, "chain", "--cell", "delta:g=5", "--period", "1",
            "--k-min", "0.5", "--k-max", "4.0", "--k-count", "15", "--N", "12",
        )
        assert code == 0
        rows = parse_csv(out)
        assert all(float(row["dual_path_diff"]) < 1e-10 for row in rows)

    def test_free_cell_all_ones(self, capsys):
        _, out, _ = run_cli(
            capsys, "chain", "--cell", "delta:g=0", "--period", "1",
            "--k-min", "0.5", "--k-max", "1.5", "--k-count", "3", "--N", "16",
        )
        rows = parse_csv(out)
        assert all(row["T_recurrence"] == "1" for row in rows)

    def test_n1_row_matches_cell_command(self, capsys):
        _, out_chain, _ = run_cli(
            capsys, "chain", "--cell", "delta:g=1", "--period", "1",
            "--k-min", "1", "--k-max", "2", "--k-count", "2", "--N", "1",
        )
        _, out_cell, _ = run_cli(
            capsys, "cell", "--cell", "delta:g=1", "--k-min", "1",
            "--k-max", "2", "--k-count", "2",
        )
        chain_rows = parse_csv(out_chain)
        cell_rows = parse_csv(out_cell)
        for chain_row, cell_row in zip(chain_rows, cell_rows):
            assert chain_row["T_recurrence"] == cell_row["T"]
            assert chain_row["alpha_t"] == cell_row["alpha_t"]

    def test_per_n_mode(self, capsys):
        code, out, _ = run_cli(
            capsys, "chain", "--cell", "delta:g=5", "--period", "1",
            "--k0", "1.0", "--N-max", "8", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert [row["N"] for row in payload["rows"]] == list(range(1, 9))
        assert all(row["dual_path_diff"] < 1e-10 for row in payload["rows"])

    def test_requires_exactly_one_mode(self, capsys):
        code, _, err = run_cli(
            capsys, "chain", "--cell", "delta:g=5", "--period", "1",
            "--k-min", "1", "--k-max", "2", "--k-count", "2",
        )
        assert code == 2 and "chain" in err


class TestBandsCommand:
    def test_delta_comb_band_gap_structure(self, capsys):
        code, out, _ = run_cli(
            capsys, "bands", "--cell", "delta:g=5", "--period", "1",
            "--k-min", "0.2", "--k-max", "9.0", "--k-count", "200", "--N-max", "32",
        )
        assert code == 0
        rows = parse_csv(out)
        verdicts = [row["verdict"] for row in rows]
        assert {"Band", "Gap"} <= set(verdicts)
        # contiguous blocks alternate between Band and Gap intervals
        blocks = [v for i, v in enumerate(verdicts) if i == 0 or verdicts[i - 1] != v]
        assert len(blocks) >= 4
        k_one = min(rows, key=lambda row: abs(float(row["k"]) - 1.0))
        assert k_one["verdict"] == "Gap"

    def test_free_cell_all_band(self, capsys):
        _, out, _ = run_cli(
            capsys, "bands", "--cell", "delta:g=0", "--period", "1",
            "--k-min", "0.3", "--k-max", "2.8", "--k-count", "40", "--N-max", "8",
        )
        rows = parse_csv(out)
        assert all(row["verdict"] == "Band" for row in rows)

    def test_edge_row_at_ka_pi(self, capsys):
        _, out, _ = run_cli(
            capsys, "bands", "--cell", "delta:g=5", "--period", "1",
            "--k-min", str(math.pi), "--k-max", "4.0", "--k-count", "5", "--N-max", "8",
        )
        rows = parse_csv(out)
        assert rows[0]["verdict"] == "Edge"
        assert float(rows[0]["z"]) == pytest.approx(-1.0, abs=1e-12)


class TestHartmanCommand:
    def test_gap_saturation_column(self, capsys):
        code, out, _ = run_cli(
            capsys, "hartman", "--cell", "delta:g=5", "--period", "1",
            "--k0", "1.0", "--N-max", "12",
        )
        assert code == 0
        rows = parse_csv(out)
        assert rows[0]["increment"] == ""
        assert all(row["warning"] == "" for row in rows)
        final_increment = abs(float(rows[-1]["increment"]))
        assert final_increment < 1e-6

    def test_free_cell_exact_free_flight(self, capsys):
        _, out, _ = run_cli(
            capsys, "hartman", "--cell", "delta:g=0", "--period", "1",
            "--k0", "1.3", "--N-max", "5",
        )
        rows = parse_csv(out)
        for row in rows:
            assert float(row["T_t"]) == pytest.approx(int(row["N"]) / 1.3, rel=1e-12)

    def test_band_point_populates_warning(self, capsys):
        code, out, _ = run_cli(
            capsys, "hartman", "--cell", "delta:g=5", "--period", "1",
            "--k0", "2.5", "--N-max", "6",
        )
        assert code == 0
        rows = parse_csv(out)
        assert all("not in a gap" in row["warning"] for row in rows)


class TestDelayCommand:
    def test_displaced_pair_columns(self, capsys):
        code, out, _ = run_cli(
            capsys, "delay", "--cell", "delta:g=1", "--period", "0.7",
            "--k-min", "0.5", "--k-max", "1.5", "--k-count", "3", "--displaced",
        )
        assert code == 0
        for row in parse_csv(out):
            k = float(row["k"])
            assert abs(float(row["dtau_t"])) < 1e-9
            assert float(row["dtau_l"]) == pytest.approx(2 * 0.7 / k, abs=1e-6)
            assert float(row["dtau_r"]) == pytest.approx(-2 * 0.7 / k, abs=1e-6)

    def test_free_cell_zero_delay_undefined_reflections(self, capsys):
        _, out, _ = run_cli(
            capsys, "delay", "--cell", "delta:g=0", "--k-min", "0.5",
            "--k-max", "1.5", "--k-count", "3",
        )
        for row in parse_csv(out):
            assert abs(float(row["tau_t"])) < 1e-9
            assert row["tau_l"] == "" and row["tau_r"] == ""


class TestPacketCommand:
    def test_midgap_average_vanishes(self, capsys):
        code, out, _ = run_cli(
            capsys, "packet", "--cell", "delta:g=5", "--period", "1",
            "--k0", "1.0", "--sigma", "0.02", "--N-max", "32",
        )
        assert code == 0
        rows = parse_csv(out)
        assert float(rows[-1]["averaged_T"]) < 1e-6

    def test_free_cell_average_is_one(self, capsys):
        _, out, _ = run_cli(
            capsys, "packet", "--cell", "delta:g=0", "--period", "1",
            "--k0", "2.0", "--sigma", "0.05", "--N-max", "3",
        )
        rows = parse_csv(out)
        assert all(row["averaged_T"] == "1" for row in rows)

    def test_midband_average_steadier_than_pointwise(self, capsys):
        _, out, _ = run_cli(
            capsys, "packet", "--cell", "delta:g=1", "--period", "1",
            "--k0", "2.0", "--sigma", "0.02", "--N-max", "48",
        )
        rows = parse_csv(out)[31:]  # N = 32..48
        averaged = [float(row["averaged_T"]) for row in rows]
        pointwise = [float(row["pointwise_T_k0"]) for row in rows]
        spread_avg = max(averaged) - min(averaged)
        spread_point = max(pointwise) - min(pointwise)
        assert spread_point > 0.1
        assert spread_avg < spread_point / 3.0


class TestOutputFormats:
    def test_csv_uses_crlf_and_17_digits(self, capsys):
        _, out, _ = run_cli(
            capsys, "cell", "--cell", "delta:g=1", "--k-min", "0.1",
            "--k-max", "0.3", "--k-count", "2",
        )
        assert "\r\n" in out
        row = parse_csv(out)[0]
        assert row["k"] == "0.10000000000000001"

    def test_json_meta_and_rows(self, capsys):
        _, out, _ = run_cli(
            capsys, "cell", "--cell", "delta:g=0", "--k-min", "1",
            "--k-max", "2", "--k-count", "2", "--format", "json",
        )
        payload = json.loads(out)
        assert payload["meta"]["command"] == "cell"
        assert payload["meta"]["version"] == sc.__version__
        keys = {tuple(row.keys()) for row in payload["rows"]}
        assert len(keys) == 1  # identical keys on every row
        # undefined phases serialize as null, never clamped
        assert payload["rows"][0]["alpha_l"] is None

    def test_byte_identical_reruns(self, capsys, tmp_path):
        args = [
            "bands", "--cell", "delta:g=5", "--period", "1", "--k-min", "0.5",
            "--k-max", "6.0", "--k-count", "64", "--N-max", "16",
        ]
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second
        out_path = tmp_path / "table.csv"
        code = main(args + ["--out", str(out_path)])
        capsys.readouterr()
        assert code == 0
        assert out_path.read_bytes().decode("utf-8") == first

    def test_out_file_json(self, capsys, tmp_path):
        out_path = tmp_path / "table.json"
        code = main([
            "cell", "--cell", "delta:g=1", "--k-min", "1", "--k-max", "2",
            "--k-count", "2", "--format", "json", "--out", str(out_path),
        ])
        capsys.readouterr()
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert len(payload["rows"]) == 2

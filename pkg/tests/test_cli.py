"""End-to-end checks of the command-line entry point.

Every test drives ``subplanck.cli.main`` in process and inspects the
artifacts it leaves behind, so the exit-code contract, the JSON payload
layout and the CSV formats are all pinned here.
"""

from __future__ import annotations

import json
import math

import pytest

from conftest import P0, SIGMA, X0
from subplanck.cli import main


def run_cli(out_dir, *argv: str) -> int:
    return main([*argv, "--out", str(out_dir)])


def read_json(out_dir, name: str) -> dict:
    with open(out_dir / f"{name}.json", encoding="utf-8") as fh:
        return json.load(fh)


def read_csv_lines(out_dir, name: str) -> list[str]:
    text = (out_dir / f"{name}.csv").read_text(encoding="utf-8")
    assert text.endswith("\n")
    return text[:-1].split("\n")


def last_error(capsys) -> dict:
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)["error"]


class TestWigner:
    def test_closed_run_writes_artifacts(self, tmp_path):
        rc = run_cli(tmp_path, "wigner", "--state", "mixed", "--nx", "241", "--np", "241")
        assert rc == 0
        payload = read_json(tmp_path, "wigner")
        params = payload["params"]
        assert params["state"] == "mixed"
        assert params["np"] == 241 and params["nx"] == 241
        assert params["method"] == "closed"
        summary = payload["summary"]
        assert summary["nx"] == 241 and summary["np"] == 241
        assert summary["x_max"] == pytest.approx(X0 + 8 * SIGMA)
        assert summary["p_max"] == pytest.approx(P0 + 4 / SIGMA)
        assert summary["integral"] == pytest.approx(1.0, abs=1e-6)
        # the symmetric odd grid puts a node at the origin, where the
        # mixture peaks at 1/(pi hbar)
        assert summary["max"] == pytest.approx(1 / math.pi, rel=1e-9)
        assert payload["state"]["kind"]
        lines = read_csv_lines(tmp_path, "wigner")
        assert lines[0] == "x,p,w"
        assert len(lines) == 1 + 241 * 241

    def test_integral_method_matches_normalization(self, tmp_path):
        rc = run_cli(
            tmp_path,
            "wigner",
            "--state", "cat-position",
            "--x0", "1.5",
            "--method", "integral",
            "--rule", "simpson",
            "--x-half", "6", "--p-half", "8",
            "--nx", "31", "--np", "31",
        )
        assert rc == 0
        payload = read_json(tmp_path, "wigner")
        assert payload["params"]["method"] == "integral"
        assert payload["params"]["rule"] == "simpson"
        assert payload["summary"]["integral"] == pytest.approx(1.0, abs=1e-5)

    def test_format_json_skips_csv(self, tmp_path):
        rc = run_cli(
            tmp_path, "wigner", "--nx", "21", "--np", "21", "--format", "json"
        )
        assert rc == 0
        assert (tmp_path / "wigner.json").exists()
        assert not (tmp_path / "wigner.csv").exists()

    def test_format_csv_still_writes_json(self, tmp_path):
        # the JSON payload is the machine-readable record of the run and
        # is emitted unconditionally; --format only gates the CSV
        rc = run_cli(tmp_path, "wigner", "--nx", "21", "--np", "21", "--format", "csv")
        assert rc == 0
        assert (tmp_path / "wigner.json").exists()
        assert (tmp_path / "wigner.csv").exists()

    def test_out_directory_is_created(self, tmp_path):
        out = tmp_path / "nested" / "dir"
        rc = run_cli(out, "wigner", "--nx", "21", "--np", "21", "--format", "json")
        assert rc == 0
        assert (out / "wigner.json").exists()

    def test_coverage_failure_exits_4(self, tmp_path, capsys):
        rc = run_cli(
            tmp_path,
            "wigner",
            "--state", "cat-position",
            "--method", "integral",
            "--x-half", "2",
            "--nx", "21", "--np", "21",
        )
        assert rc == 4
        error = last_error(capsys)
        assert error["code"] == 4
        assert error["kind"] == "CoverageError"
        assert "x window" in error["message"]
        assert not (tmp_path / "wigner.json").exists()


class TestTiles:
    def test_lattice_artifacts(self, tmp_path):
        rc = run_cli(tmp_path, "tiles")
        assert rc == 0
        payload = read_json(tmp_path, "tiles")
        lattice = payload["lattice"]
        predicted = math.pi**2 / (16 * X0 * P0)
        assert lattice["tile_area_predicted"] == pytest.approx(predicted)
        assert lattice["tile_area_measured"] == pytest.approx(predicted, rel=1e-6)
        assert lattice["cell_area_measured"] == pytest.approx(4 * predicted, rel=1e-6)
        assert lattice["relative_error"] < 1e-6
        assert lattice["subplanck"] is True
        assert lattice["hbar"] == 1.0
        checker = payload["checkerboard"]
        assert checker["pattern"] == "checkerboard"
        assert checker["signs_ok"] is True
        assert checker["first_mismatch"] is None
        assert checker["centers_checked"] > 0
        touches = payload["touches"]
        assert touches["x_first"] == pytest.approx(math.pi / (2 * P0), rel=1e-6)
        assert touches["p_first"] == pytest.approx(math.pi / (2 * X0), rel=1e-6)
        lines = read_csv_lines(tmp_path, "tiles")
        assert lines[0] == "family,index,position"
        families = {line.split(",")[0] for line in lines[1:]}
        assert {"x_line", "p_line", "x_touch", "p_touch"} <= families


class TestSensitivity:
    def test_scan_without_search(self, tmp_path):
        rc = run_cli(
            tmp_path, "sensitivity", "--n1", "3", "--n2", "3", "--no-search"
        )
        assert rc == 0
        payload = read_json(tmp_path, "sensitivity")
        assert payload["overlap_at_zero"] == pytest.approx(1 / (4 * math.pi), rel=1e-9)
        assert "orthogonality" not in payload
        assert payload["scan"]["d1_max"] == pytest.approx(1.5 * math.pi / X0)
        assert payload["scan"]["d2_max"] == pytest.approx(1.5 * math.pi / P0)
        lines = read_csv_lines(tmp_path, "sensitivity")
        assert lines[0] == "delta1,delta2,overlap_numeric,overlap_reference"
        assert len(lines) == 1 + 3 * 3
        d1, d2, numeric, reference = lines[1].split(",")
        assert float(d1) == 0.0 and float(d2) == 0.0
        assert float(numeric) == pytest.approx(1 / (4 * math.pi), rel=1e-9)
        assert float(reference) == pytest.approx(4 / math.pi, rel=1e-12)

    def test_compass_rows_have_no_reference(self, tmp_path):
        rc = run_cli(
            tmp_path,
            "sensitivity",
            "--state", "compass",
            "--n1", "2", "--n2", "2",
            "--no-search",
        )
        assert rc == 0
        lines = read_csv_lines(tmp_path, "sensitivity")
        # the printed reference formula is specific to the mixture, so the
        # compass rows leave that column empty
        assert all(line.endswith(",") for line in lines[1:])

    def test_search_payload(self, tmp_path):
        rc = run_cli(
            tmp_path, "sensitivity", "--n1", "2", "--n2", "2", "--n-scan", "151"
        )
        assert rc == 0
        result = read_json(tmp_path, "sensitivity")["orthogonality"]
        assert result["achieved"] is True
        assert result["delta1_star"] == pytest.approx(math.pi / (2 * X0), rel=1e-5)
        assert result["delta2_star"] == pytest.approx(math.pi / (2 * P0), rel=1e-5)
        assert result["product"] == pytest.approx(math.pi**2 / (4 * X0 * P0), rel=1e-4)
        assert abs(result["min_overlap"]) < 1e-8
        assert result["iterations"] >= 1


class TestDecohere:
    def test_position_curve(self, tmp_path):
        rc = run_cli(tmp_path, "decohere", "--nt", "9", "--threads", "2")
        assert rc == 0
        payload = read_json(tmp_path, "decohere")
        assert payload["params"]["offset"] == 4.5
        taus = payload["decoherence_times"]
        assert set(taus) == {"threshold_0.5", "threshold_1.0", "threshold_2.0"}
        assert taus["threshold_0.5"] < taus["threshold_1.0"] < taus["threshold_2.0"]
        assert payload["tau_linear_estimate"] == pytest.approx(1 / 81, rel=1e-12)
        assert payload["params"]["t_max"] == pytest.approx(4 * taus["threshold_1.0"])
        lines = read_csv_lines(tmp_path, "decohere")
        assert lines[0] == "t,attenuation,visibility"
        assert len(lines) == 1 + 9
        t0, a0, v0 = (float(v) for v in lines[1].split(","))
        assert t0 == 0.0 and a0 == 0.0 and v0 == 1.0
        t_last, a_last, v_last = (float(v) for v in lines[-1].split(","))
        assert t_last == pytest.approx(payload["params"]["t_max"])
        assert a_last > 1.0 and v_last == pytest.approx(math.exp(-a_last), rel=1e-12)

    def test_momentum_default_offset(self, tmp_path):
        rc = run_cli(tmp_path, "decohere", "--kind", "momentum", "--nt", "5")
        assert rc == 0
        payload = read_json(tmp_path, "decohere")
        assert payload["params"]["offset"] == 10.0
        assert payload["tau_linear_estimate"] == pytest.approx(0.01, rel=1e-12)
        # the momentum attenuation grows cubically, so the crossing sits far
        # above the linear-rate label
        ratio = payload["decoherence_times"]["threshold_1.0"] / 0.01
        assert 20.0 < ratio < 22.0

    def test_gamma_zero_exits_3(self, tmp_path, capsys):
        rc = run_cli(tmp_path, "decohere", "--gamma", "0", "--nt", "5")
        assert rc == 3
        error = last_error(capsys)
        assert error["kind"] == "SearchError"
        assert "never attenuates" in error["message"]

    def test_negative_mass_exits_2(self, tmp_path, capsys):
        rc = run_cli(tmp_path, "decohere", "--mass", "-1")
        assert rc == 2
        assert last_error(capsys)["kind"] == "ValueError"


class TestKerr:
    def test_quarter_period_has_four_components(self, tmp_path):
        rc = run_cli(
            tmp_path,
            "kerr",
            "--alpha-re", "2",
            "--kappa-t", repr(math.pi / 2),
            "--cutoff", "48",
        )
        assert rc == 0
        payload = read_json(tmp_path, "kerr")
        assert payload["component_count"] == 4
        assert payload["cutoff_used"] == 48
        assert payload["norm"] == pytest.approx(1.0, rel=1e-12)
        assert payload["params"]["radius"] == 2.0
        assert not (tmp_path / "kerr.csv").exists()

    def test_half_period_has_two_components(self, tmp_path):
        rc = run_cli(
            tmp_path,
            "kerr",
            "--alpha-re", "2",
            "--kappa-t", repr(math.pi),
            "--cutoff", "48",
        )
        assert rc == 0
        assert read_json(tmp_path, "kerr")["component_count"] == 2

    def test_small_cutoff_exits_3(self, tmp_path, capsys):
        rc = run_cli(tmp_path, "kerr", "--alpha-re", "3", "--cutoff", "8")
        assert rc == 3
        assert last_error(capsys)["kind"] == "TruncationError"


class TestCompare:
    def test_mixture_and_compass_agree(self, tmp_path):
        rc = run_cli(tmp_path, "compare", "--n-scan", "121")
        assert rc == 0
        payload = read_json(tmp_path, "compare")
        assert payload["mixed"]["achieved"] is True
        assert payload["compass"]["achieved"] is True
        assert payload["product_ratio"] == pytest.approx(1.0, abs=1e-3)
        assert payload["mixed"]["delta1_star"] == pytest.approx(
            math.pi / (2 * X0), rel=1e-4
        )


class TestConfig:
    def test_config_under_explicit_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"nt": 7, "gamma": 0.25, "t-max": 1.0}))
        rc = run_cli(
            tmp_path, "decohere", "--config", str(cfg), "--gamma", "0.5"
        )
        assert rc == 0
        payload = read_json(tmp_path, "decohere")
        assert payload["params"]["gamma"] == 0.5
        assert payload["params"]["nt"] == 7
        assert payload["params"]["t_max"] == 1.0
        assert len(read_csv_lines(tmp_path, "decohere")) == 1 + 7

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"delta": 1}))
        rc = run_cli(tmp_path, "decohere", "--config", str(cfg))
        assert rc == 2
        error = last_error(capsys)
        assert error["kind"] == "ConfigError"
        assert "delta" in error["message"]

    def test_malformed_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("not json {")
        assert run_cli(tmp_path, "decohere", "--config", str(cfg)) == 2
        assert last_error(capsys)["kind"] == "ConfigError"

    def test_non_object_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert run_cli(tmp_path, "decohere", "--config", str(cfg)) == 2
        assert "object" in last_error(capsys)["message"]

    def test_zero_threads_exits_2(self, tmp_path, capsys):
        rc = run_cli(tmp_path, "decohere", "--threads", "0")
        assert rc == 2
        assert last_error(capsys)["kind"] == "ConfigError"


class TestThreadDeterminism:
    def test_sensitivity_rows(self, tmp_path):
        for threads in (1, 2, 8):
            rc = run_cli(
                tmp_path / str(threads),
                "sensitivity",
                "--n1", "4", "--n2", "4",
                "--no-search",
                "--threads", str(threads),
            )
            assert rc == 0
        base_csv = (tmp_path / "1" / "sensitivity.csv").read_bytes()
        base_json = (tmp_path / "1" / "sensitivity.json").read_bytes()
        for threads in (2, 8):
            assert (tmp_path / str(threads) / "sensitivity.csv").read_bytes() == base_csv
            assert (tmp_path / str(threads) / "sensitivity.json").read_bytes() == base_json

    def test_decohere_curve(self, tmp_path):
        for threads in (1, 4):
            rc = run_cli(
                tmp_path / str(threads),
                "decohere",
                "--nt", "7",
                "--threads", str(threads),
            )
            assert rc == 0
        for name in ("decohere.csv", "decohere.json"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()

import json
import math
import shutil

import pytest

from navbound.cli import EXIT_DEGENERATE, EXIT_OK, EXIT_USAGE, run


def write_geometry(tmp_path, sats, track_azimuth_deg=None):
    path = tmp_path / "geometry.json"
    payload = sats if track_azimuth_deg is None else {
        "track_azimuth_deg": track_azimuth_deg, "satellites": sats}
    path.write_text(json.dumps(payload))
    return str(path)


class TestCode:
    def test_csv(self, capsys):
        assert run(["code", "--prn", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0] == "k,chip"
        assert len(lines) == 1024
        assert all(line.split(",")[1] in ("1", "-1") for line in lines[1:])

    def test_json_matches_library(self, capsys):
        from navbound.cacode import generate_ca_code
        assert run(["code", "--prn", "7", "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["chips"] == generate_ca_code(7).chips.tolist()

    def test_output_file(self, tmp_path, capsys):
        dest = tmp_path / "code.csv"
        assert run(["code", "--prn", "3", "--output", str(dest)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert dest.read_text().startswith("k,chip")

    def test_bad_prn(self, capsys):
        assert run(["code", "--prn", "99"]) == EXIT_USAGE
        assert capsys.readouterr().err != ""


class TestInterference:
    def test_noise_free_bound(self, capsys):
        assert run(["interference", "--prn", "1", "--power", "1e-4",
                    "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        shift = abs(payload["delta_tau_empirical"])
        assert shift <= 1.05 * payload["delta_tau_bound"]
        assert shift >= 0.9 * payload["delta_tau_bound"]
        assert payload["m_tau"] > 0

    def test_deterministic_with_seed(self, capsys):
        argv = ["interference", "--prn", "2", "--power", "1e-4",
                "--sigma", "0.01", "--seed", "42", "--format", "json"]
        assert run(argv) == EXIT_OK
        first = capsys.readouterr().out
        assert run(argv) == EXIT_OK
        assert capsys.readouterr().out == first


class TestTrack:
    def test_two_sat_value(self, tmp_path, capsys):
        path = write_geometry(tmp_path, [
            {"sat_id": "A", "f": -0.5, "h": 0.1},
            {"sat_id": "B", "f": 0.8, "h": -0.2},
        ])
        assert run(["track", "--geometry", path, "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["m_s"] == pytest.approx(2.0, abs=1e-9)

    def test_two_sat_same_sign_inadmissible(self, tmp_path, capsys):
        path = write_geometry(tmp_path, [
            {"sat_id": "A", "f": 0.5, "h": 0.1},
            {"sat_id": "B", "f": 0.8, "h": -0.2},
        ])
        assert run(["track", "--geometry", path]) == EXIT_DEGENERATE
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "inadmissible" in captured.err

    def test_three_sat_symmetric(self, tmp_path, capsys):
        r = 0.5
        sats = [{"sat_id": str(j), "f": r * math.cos(a), "h": r * math.sin(a)}
                for j, a in enumerate(
                    (math.pi / 2, math.pi / 2 + 2 * math.pi / 3,
                     math.pi / 2 + 4 * math.pi / 3))]
        path = write_geometry(tmp_path, sats)
        assert run(["track", "--geometry", path, "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["m_u"] == pytest.approx(math.sqrt(3) / r, abs=1e-9)
        assert payload["m_v"] == pytest.approx(2.0 / r, abs=1e-9)

    def test_three_sat_collinear_degenerate(self, tmp_path, capsys):
        sats = [{"sat_id": str(j), "f": 0.1 * j, "h": 0.2 * j}
                for j in range(3)]
        path = write_geometry(tmp_path, sats)
        assert run(["track", "--geometry", path]) == EXIT_DEGENERATE
        assert capsys.readouterr().err != ""

    def test_elevation_azimuth_form(self, tmp_path, capsys):
        # east-west track: due-east sat has f = -cos(el), due-west f = +cos(el)
        path = write_geometry(tmp_path, [
            {"sat_id": "E", "elevation": 60.0, "azimuth": 90.0},
            {"sat_id": "W", "elevation": 60.0, "azimuth": 270.0},
        ])
        assert run(["track", "--geometry", path, "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["m_s"] == pytest.approx(1.0 / math.cos(math.radians(60.0)),
                                               abs=1e-9)

    def test_wrong_count(self, tmp_path, capsys):
        path = write_geometry(tmp_path, [{"sat_id": "A", "f": 0.5, "h": 0.0}])
        assert run(["track", "--geometry", path]) == EXIT_USAGE

    def test_missing_file(self, capsys):
        assert run(["track", "--geometry", "/nonexistent.json"]) == EXIT_USAGE


class TestScanAndHist:
    def test_full_pipeline(self, nav_path, tmp_path, capsys):
        series = tmp_path / "series.csv"
        argv = ["scan", "--nav", str(nav_path),
                "--lat", "34.75337", "--lon", "135.42783", "--height", "3.7",
                "--output", str(series)]
        assert run(argv) == EXIT_OK
        assert capsys.readouterr().out == ""
        lines = series.read_text().strip().splitlines()
        assert lines[0] == "week,sow,n_visible,best_m_s,sat_a,sat_b"
        assert len(lines) == 1441

        assert run(["hist", "--series", str(series),
                    "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert sum(payload["relative_frequency"]) + payload["overflow"] \
            == pytest.approx(1.0, abs=1e-12)

    def test_scan_determinism(self, nav_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["scan", "--nav", str(nav_path), "--lat", "34.75337",
                "--lon", "135.42783", "--step", "600"]
        assert run(argv + ["--output", str(a)]) == EXIT_OK
        assert run(argv + ["--output", str(b)]) == EXIT_OK
        assert a.read_text() == b.read_text()

    def test_hist_missing_column_fails_cleanly(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("week,sow\n1750,0.0\n")
        assert run(["hist", "--series", str(bad)]) == EXIT_USAGE
        assert capsys.readouterr().err != ""

    def test_hist_all_gaps(self, tmp_path, capsys):
        series = tmp_path / "gaps.csv"
        series.write_text("week,sow,n_visible,best_m_s,sat_a,sat_b\n"
                          "1750,0.000,1,,,\n")
        assert run(["hist", "--series", str(series)]) == EXIT_DEGENERATE


class TestUsage:
    def test_no_subcommand(self):
        assert run([]) == EXIT_USAGE

    def test_unknown_subcommand(self):
        assert run(["frobnicate"]) == EXIT_USAGE

    def test_missing_required_argument(self):
        assert run(["code"]) == EXIT_USAGE

    def test_help_exits_zero(self):
        assert run(["--help"]) == 0

    def test_console_script_installed(self):
        assert shutil.which("navbound") is not None

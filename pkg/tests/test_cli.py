import math

import pytest

from quadsim.harness.cli import main
from quadsim.harness.scenario import write_default_scenario_files
from quadsim.harness.telemetry import CSV_HEADER
from quadsim.propulsion import blade_velocity
from quadsim.radio import ChannelSet, save_channel_trace


@pytest.fixture(scope="module")
def scenario_file(tmp_path_factory):
    directory = tmp_path_factory.mktemp("scenario")
    scenario_path, _ = write_default_scenario_files(directory)
    return scenario_path


class TestRun:
    def test_writes_telemetry(self, scenario_file, tmp_path, capsys):
        out = tmp_path / "log.csv"
        code = main(["run", "--scenario", str(scenario_file), "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) > 1000
        assert "records" in capsys.readouterr().out

    def test_seed_override_changes_log(self, scenario_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["run", "--scenario", str(scenario_file), "--out", str(a), "--seed", "1"]) == 0
        assert main(["run", "--scenario", str(scenario_file), "--out", str(b), "--seed", "2"]) == 0
        assert a.read_bytes() != b.read_bytes()

    def test_missing_scenario_is_validation_error(self, tmp_path):
        code = main(["run", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")])
        assert code == 2


class TestBladeField:
    def test_matches_pointwise_formula(self, tmp_path):
        out = tmp_path / "field.csv"
        code = main([
            "bladefield", "--rpm", "1000", "--vmph", "28",
            "--radius-ft", str(1 / 3), "--n", "20", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "x_ft,y_ft,u_ftps"
        assert len(lines) == 1 + 400
        x, y, u = (float(v) for v in lines[1].split(","))
        span = (1 / 3) / 20
        azimuth = 2 * math.pi / 20
        assert u == pytest.approx(blade_velocity(span, azimuth, 1000, 28), rel=1e-9)

    def test_appendix_pi_flag(self, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        base = ["bladefield", "--rpm", "1000", "--vmph", "28", "--radius-ft", "0.3333", "--n", "10"]
        assert main(base + ["--out", str(out_a)]) == 0
        assert main(base + ["--out", str(out_b), "--appendix-pi"]) == 0
        assert out_a.read_bytes() != out_b.read_bytes()

    def test_bad_grid_rejected(self, tmp_path):
        code = main([
            "bladefield", "--rpm", "1000", "--vmph", "28",
            "--radius-ft", "0.3", "--n", "1", "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 2


class TestReceiverTest:
    def test_reports_zones_and_violations(self, tmp_path, capsys):
        rows = [
            (0.0, ChannelSet()),
            (1.0, ChannelSet(throttle=0, yaw=100)),
            (2.0, ChannelSet(throttle=0, yaw=-100)),
            (3.0, ChannelSet(roll=110.0)),
        ]
        trace = tmp_path / "trace.csv"
        save_channel_trace(rows, trace)
        assert main(["receiver-test", "--trace", str(trace)]) == 0
        out = capsys.readouterr().out
        assert "Safe Zone" in out
        assert "Arm" in out
        assert "Disarm" in out

    def test_missing_trace(self, tmp_path):
        assert main(["receiver-test", "--trace", str(tmp_path / "nope.csv")]) == 2


class TestEndurance:
    def test_prints_times(self, capsys):
        assert main(["endurance", "--capacity-ah", "3.7", "--current-a", "22.2"]) == 0
        out = capsys.readouterr().out
        assert "alarm at" in out
        depleted = float(out.split("depleted at ")[1].split(" min")[0])
        assert depleted == pytest.approx(10.0, rel=0.05)

    def test_peukert_flag(self, capsys):
        assert main(["endurance", "--capacity-ah", "3.7", "--current-a", "22.2", "--k", "1.2"]) == 0
        out = capsys.readouterr().out
        assert "depleted at" in out

    def test_invalid_values(self):
        assert main(["endurance", "--capacity-ah", "0", "--current-a", "22.2"]) == 2

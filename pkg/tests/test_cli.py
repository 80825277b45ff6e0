"""End-to-end tests of the command-line surface.

Every command is a pure function of (config, inputs, seed): exit code 0
on success, 2 on validation problems, 3 on fit failures; every run
emits a report listing each output file with its content hash.
"""

import hashlib
import json

import numpy as np
import pytest

import thermoq
from thermoq import cli, io
from thermoq.constants import TWO_PI
from thermoq.tlssim import TimeSeries

from test_config import base_config


@pytest.fixture(autouse=True)
def fixed_environment(monkeypatch):
    monkeypatch.delenv("THERMOQ_SEED", raising=False)
    monkeypatch.setenv("THERMOQ_TIMESTAMP", "2026-01-01T00:00:00+00:00")


def write_config(tmp_path, **overrides):
    data = base_config()
    for path, value in overrides.items():
        section, _, key = path.partition(".")
        if key:
            data[section][key] = value
        else:
            data[section] = value
    data["output_dir"] = str(tmp_path / "out")
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(data))
    return cfg


def read_json(path):
    return json.loads(path.read_text())


def read_csv_columns(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [[float(tok) for tok in line.split(",")] for line in lines[1:]]
    return header, np.array(rows)


class TestRates:
    def test_budget_json(self, tmp_path):
        cfg = write_config(tmp_path)
        assert cli.main(["rates", "--config", str(cfg)]) == 0
        budget = read_json(tmp_path / "out" / "rates.json")
        assert budget["gamma_phi_0_hz"] == pytest.approx(150e3, rel=1e-12)
        assert budget["gamma1_purcell_hz"] == pytest.approx(52.8e3, rel=0.01)
        assert budget["gamma_mix_hz"] == pytest.approx(14.27e3, rel=0.01)
        assert budget["gamma1_0_hz"] == pytest.approx(3.9e6, rel=1e-12)
        assert budget["gamma_phi_2nd_antenna_hz"] > 0
        assert budget["warnings"] == []

    def test_report_lists_outputs_with_hashes(self, tmp_path):
        cfg = write_config(tmp_path)
        cli.main(["rates", "--config", str(cfg)])
        report = read_json(tmp_path / "out" / "report.json")
        assert report["command"] == "rates"
        assert report["version"] == thermoq.__version__
        assert report["timestamp"] == "2026-01-01T00:00:00+00:00"
        assert str(cfg) in report["inputs"]
        (entry,) = [o for o in report["outputs"] if o["path"] == "rates.json"]
        digest = hashlib.sha256(
            (tmp_path / "out" / "rates.json").read_bytes()).hexdigest()
        assert entry["sha256"] == digest

    def test_output_dir_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path)
        other = tmp_path / "elsewhere"
        assert cli.main(["rates", "--config", str(cfg),
                         "--output-dir", str(other)]) == 0
        assert (other / "rates.json").exists()
        assert not (tmp_path / "out").exists()


class TestStarkSweepAndCalibrate:
    def test_sweep_then_readout_calibration_round_trip(self, tmp_path):
        cfg = write_config(tmp_path)
        assert cli.main(["stark-sweep", "--config", str(cfg)]) == 0
        sweep_csv = tmp_path / "out" / "stark_sweep.csv"
        header, rows = read_csv_columns(sweep_csv)
        assert header == ["temp_k", "shift_hz"]
        assert rows.shape == (15, 2)
        assert np.all(np.diff(rows[:, 0]) > 0)
        assert np.all(rows[1:, 1] < 0)  # negative-chi Stark shifts

        assert cli.main(["calibrate", "--config", str(cfg),
                         "--input", str(sweep_csv),
                         "--port", "readout"]) == 0
        result = read_json(tmp_path / "out" / "calibration.json")
        assert result["port"] == "readout"
        assert result["alpha"] == pytest.approx(0.389, rel=1e-6)

    def test_antenna_calibration_needs_alpha(self, tmp_path):
        cfg = write_config(tmp_path)
        cli.main(["stark-sweep", "--config", str(cfg)])
        sweep_csv = tmp_path / "out" / "stark_sweep.csv"
        assert cli.main(["calibrate", "--config", str(cfg),
                         "--input", str(sweep_csv),
                         "--port", "antenna"]) == 2

    def test_degenerate_sweep_is_a_fit_error(self, tmp_path):
        cfg = write_config(tmp_path)
        sweep_csv = tmp_path / "flat.csv"
        lines = ["temp_k,shift_hz"]
        for i, T in enumerate([1.498, 1.5, 1.502, 1.504]):
            lines.append(f"{T},{-1e5 - i}")
        sweep_csv.write_text("\n".join(lines) + "\n")
        assert cli.main(["calibrate", "--config", str(cfg),
                         "--input", str(sweep_csv),
                         "--port", "readout"]) == 3


class TestDeterministicSweeps:
    def test_gamma1_sweep_columns(self, tmp_path):
        cfg = write_config(tmp_path)
        assert cli.main(["gamma1-sweep", "--config", str(cfg),
                         "--n-max", "2.0", "--points", "21"]) == 0
        header, rows = read_csv_columns(tmp_path / "out" / "gamma1_sweep.csv")
        assert header == ["photon_number", "gamma1_antenna_hz",
                          "gamma1_dispersive_hz", "delta_gamma1_res_hz"]
        assert rows.shape == (21, 4)
        assert rows[0, 1] == pytest.approx(3.9e6, rel=1e-12)
        # stimulated emission + absorption: 2 gamma1_a per antenna photon
        at_one = rows[np.isclose(rows[:, 0], 1.0), 1][0]
        assert at_one - rows[0, 1] == pytest.approx(2 * 820e3, rel=1e-9)

    def test_dephasing_sweep_values(self, tmp_path):
        cfg = write_config(tmp_path)
        assert cli.main(["dephasing-sweep", "--config", str(cfg),
                         "--t-min", "0.05", "--t-max", "1.5",
                         "--points", "30"]) == 0
        header, rows = read_csv_columns(tmp_path / "out" / "dephasing_sweep.csv")
        assert header == ["temp_k", "gamma_phi_hz"]
        assert rows.shape == (30, 2)
        assert rows[-1, 0] == pytest.approx(1.5)
        assert rows[-1, 1] == pytest.approx(44129.261 / TWO_PI, rel=1e-4)
        # cubic growth: doubling T multiplies the rate by 8
        assert rows[-1, 1] / np.interp(0.75, rows[:, 0], rows[:, 1]) == \
            pytest.approx(8.0, rel=1e-3)


class TestTlsSim:
    def test_phenomenological_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        first = tmp_path / "a"
        second = tmp_path / "b"
        for out in (first, second):
            assert cli.main(["tls-sim", "--config", str(cfg),
                             "--mode", "phenomenological", "--seed", "7",
                             "--output-dir", str(out)]) == 0
        name = "gamma1_series.csv"
        assert (first / name).read_bytes() == (second / name).read_bytes()
        assert (first / "report.json").read_bytes() == \
            (second / "report.json").read_bytes()

    def test_microscopic_mode_runs(self, tmp_path):
        cfg = write_config(tmp_path, **{"tls.n_tls": 20,
                                        "campaign.duration_s": 640.0})
        assert cli.main(["tls-sim", "--config", str(cfg),
                         "--mode", "microscopic", "--seed", "3"]) == 0
        series = io.read_time_series(tmp_path / "out" / "gamma1_series.csv")
        assert series.values.size == 64
        assert series.dt == 10.0
        assert np.all(series.values > 0)

    def test_seed_changes_output(self, tmp_path):
        cfg = write_config(tmp_path)
        a = tmp_path / "a"
        b = tmp_path / "b"
        cli.main(["tls-sim", "--config", str(cfg), "--mode", "phenomenological",
                  "--seed", "7", "--output-dir", str(a)])
        cli.main(["tls-sim", "--config", str(cfg), "--mode", "phenomenological",
                  "--seed", "8", "--output-dir", str(b)])
        assert (a / "gamma1_series.csv").read_bytes() != \
            (b / "gamma1_series.csv").read_bytes()

    def test_env_seed_overrides_config_and_flag_wins(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path)
        by_flag = tmp_path / "flag"
        by_env = tmp_path / "env"
        cli.main(["tls-sim", "--config", str(cfg), "--mode", "phenomenological",
                  "--seed", "7", "--output-dir", str(by_flag)])
        monkeypatch.setenv("THERMOQ_SEED", "7")
        cli.main(["tls-sim", "--config", str(cfg), "--mode", "phenomenological",
                  "--output-dir", str(by_env)])
        assert (by_flag / "gamma1_series.csv").read_bytes() == \
            (by_env / "gamma1_series.csv").read_bytes()
        monkeypatch.setenv("THERMOQ_SEED", "9")
        flag_beats_env = tmp_path / "both"
        cli.main(["tls-sim", "--config", str(cfg), "--mode", "phenomenological",
                  "--seed", "7", "--output-dir", str(flag_beats_env)])
        assert (flag_beats_env / "gamma1_series.csv").read_bytes() == \
            (by_flag / "gamma1_series.csv").read_bytes()

    def test_phenomenological_mode_requires_block(self, tmp_path):
        data = base_config()
        del data["phenomenological"]
        data["output_dir"] = str(tmp_path / "out")
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps(data))
        assert cli.main(["tls-sim", "--config", str(cfg),
                         "--mode", "phenomenological", "--seed", "7"]) == 2


class TestPsdFit:
    def test_constant_series_degenerate_flag(self, tmp_path):
        const_csv = tmp_path / "const.csv"
        io.write_time_series(
            const_csv, TimeSeries(0.0, 10.0, np.full(256, TWO_PI * 3.9e6)))
        assert cli.main(["psd-fit", "--input", str(const_csv),
                         "--output-dir", str(tmp_path / "out")]) == 0
        fit = read_json(tmp_path / "out" / "psd_fit.json")
        assert fit["degenerate"] is True
        assert fit["beta"] is None
        assert (tmp_path / "out" / "spectrum.csv").exists()

    def test_recovers_injected_slope(self, tmp_path):
        cfg = write_config(tmp_path)
        cli.main(["tls-sim", "--config", str(cfg),
                  "--mode", "phenomenological", "--seed", "7"])
        series_csv = tmp_path / "out" / "gamma1_series.csv"
        assert cli.main(["psd-fit", "--input", str(series_csv),
                         "--output-dir", str(tmp_path / "out")]) == 0
        fit = read_json(tmp_path / "out" / "psd_fit.json")
        assert fit["degenerate"] is False
        assert fit["beta"] == pytest.approx(1.132, abs=0.01)
        assert fit["omega_c_hz"] == pytest.approx(1e-3, rel=0.5)
        header, rows = read_csv_columns(tmp_path / "out" / "spectrum.csv")
        assert header == ["freq_hz", "psd_w_per_hz"]
        assert rows[0, 0] < rows[-1, 0]

    def test_missing_input_is_validation_error(self, tmp_path):
        assert cli.main(["psd-fit", "--input", str(tmp_path / "nope.csv"),
                         "--output-dir", str(tmp_path)]) == 2


class TestFloorFit:
    def test_quadratic_floor_recovery(self, tmp_path):
        temps = np.array([0.05, 0.1, 0.2, 0.4, 0.8, 1.2, 1.5])
        mu = 8e-25 + 1.1e-25 * temps**2
        floor_csv = tmp_path / "floor.csv"
        io.write_floor_points(floor_csv, list(zip(temps, mu)))
        assert cli.main(["floor-fit", "--input", str(floor_csv),
                         "--output-dir", str(tmp_path / "out")]) == 0
        fit = read_json(tmp_path / "out" / "floor_fit.json")
        assert fit["x"] == pytest.approx(0.0, abs=1e-6)
        assert fit["mu0_w_per_hz"] == pytest.approx(8e-25, rel=1e-6)
        assert fit["x_unidentifiable"] is False

    def test_too_few_points_is_validation_error(self, tmp_path):
        floor_csv = tmp_path / "floor.csv"
        io.write_floor_points(floor_csv, [(0.05, 1e-24), (0.5, 1.1e-24)])
        assert cli.main(["floor-fit", "--input", str(floor_csv),
                         "--output-dir", str(tmp_path)]) == 2


class TestCampaign:
    def test_small_campaign_pipeline(self, tmp_path):
        cfg = write_config(tmp_path, **{"tls.n_tls": 20,
                                        "campaign.duration_s": 2560.0})
        assert cli.main(["campaign", "--config", str(cfg),
                         "--seed", "5"]) == 0
        out = tmp_path / "out"
        series = io.read_time_series(out / "campaign_series.csv")
        assert series.values.size == 256
        summary = read_json(out / "campaign_summary.json")
        assert summary["n_points"] == 256
        assert summary["gamma1_mean_hz"] == pytest.approx(3.9e6, rel=0.3)
        assert summary["n_gaps"] >= 0
        assert (out / "campaign_psd.csv").exists()
        assert (out / "campaign_fit.json").exists()
        report = read_json(out / "report.json")
        assert {o["path"] for o in report["outputs"]} == {
            "campaign_series.csv", "campaign_psd.csv",
            "campaign_fit.json", "campaign_summary.json"}

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, **{"tls.n_tls": 20,
                                        "campaign.duration_s": 2560.0})
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            assert cli.main(["campaign", "--config", str(cfg), "--seed", "5",
                             "--output-dir", str(out)]) == 0
        for name in ("campaign_series.csv", "campaign_psd.csv",
                     "campaign_fit.json", "campaign_summary.json",
                     "report.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestErrorPaths:
    def test_missing_config_file(self, tmp_path):
        assert cli.main(["rates", "--config", str(tmp_path / "nope.json")]) == 2

    def test_unknown_config_key(self, tmp_path):
        data = base_config()
        data["surprise"] = 1
        data["output_dir"] = str(tmp_path / "out")
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps(data))
        assert cli.main(["rates", "--config", str(cfg)]) == 2

    def test_bad_csv_header(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,v\n0,1\n")
        assert cli.main(["psd-fit", "--input", str(bad),
                         "--output-dir", str(tmp_path)]) == 2

    def test_bad_env_seed(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path)
        monkeypatch.setenv("THERMOQ_SEED", "not-a-number")
        assert cli.main(["tls-sim", "--config", str(cfg),
                         "--mode", "phenomenological"]) == 2

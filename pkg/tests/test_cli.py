import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from ffamp.cli import (
    EXIT_INVALID,
    EXIT_OK,
    EXIT_UNPHYSICAL,
    SWEEP_HEADER,
    RunConfig,
    main,
)
from ffamp.errors import InvalidParameter
from ffamp.metrics import nf_detector, nf_ideal

GOLDEN = Path(__file__).parent / "golden"


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestConfigFile:
    def test_round_trip(self):
        cfg = RunConfig(command="sweep-nf", T=0.25, eta_inline=0.93, gains=(1.0, 2.0, 7.5))
        again = RunConfig.from_text(cfg.to_text())
        assert again == cfg

    def test_comments_fractions_and_none(self):
        cfg = RunConfig.from_text(
            "command = run-amp  # which command\nT = 2/3\nelectronic_gain = none\n\n"
        )
        assert cfg.T == pytest.approx(2 / 3) and cfg.electronic_gain is None

    def test_unknown_key(self):
        with pytest.raises(InvalidParameter):
            RunConfig.from_text("command = run-amp\nbogus = 1\n")

    def test_malformed_line(self):
        with pytest.raises(InvalidParameter):
            RunConfig.from_text("command run-amp\n")

    def test_bad_enum(self):
        with pytest.raises(InvalidParameter):
            RunConfig(command="run-amp", backend="gpu")

    def test_config_file_and_override(self, tmp_path, capsys):
        path = tmp_path / "amp.cfg"
        path.write_text("T = 0.5\nalpha_re = 0.5\nalpha_im = 0.5\n")
        code, out = run(["run-amp", "--config", str(path), "--set", "T=2/3"], capsys)
        assert code == EXIT_OK
        assert json.loads(out.out)["report"]["NF_x"] == pytest.approx(0.75)


class TestRunAmp:
    def test_ideal_noise_figure(self, capsys):
        code, out = run(["run-amp", "--T", "2/3"], capsys)
        report = json.loads(out.out)["report"]
        assert code == EXIT_OK
        assert report["NF_x"] == pytest.approx(0.75) and report["NF_p"] == pytest.approx(0.75)

    def test_unit_gain(self, capsys):
        _, out = run(["run-amp", "--T", "1"], capsys)
        report = json.loads(out.out)["report"]
        assert report["NF_x"] == pytest.approx(1.0) and report["G_x"] == pytest.approx(1.0)

    def test_bad_transmission_writes_nothing(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code, out = run(["run-amp", "--T", "1.5", "--out", str(target)], capsys)
        assert code == EXIT_INVALID and not target.exists()
        assert "error" in out.err

    def test_unphysical_input(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        argv = ["run-amp", "--set", "input_kind=thermal", "--set", "thermal_var=0.5",
                "--out", str(target)]
        code, _ = run(argv, capsys)
        assert code == EXIT_UNPHYSICAL and not target.exists()

    def test_trajectory_backend(self, capsys):
        argv = ["run-amp", "--T", "0.5", "--backend", "trajectories", "--ntraj", "2000",
                "--seed", "4"]
        code, out = run(argv, capsys)
        payload = json.loads(out.out)
        assert code == EXIT_OK and payload["backend"] == "trajectories"
        assert payload["report"]["NF_x"] == pytest.approx(2 / 3, abs=0.05)

    def test_loss_corrected_report(self, capsys):
        _, out = run(["run-amp", "--T", "0.5", "--set", "eta_hd=0.9"], capsys)
        payload = json.loads(out.out)
        assert "corrected" in json.dumps(payload)

    def test_csv_single_row(self, capsys):
        _, out = run(["run-amp", "--T", "0.5", "--format", "csv"], capsys)
        rows = csv_rows(out.out)
        assert len(rows) == 1 and float(rows[0]["NF_x"]) == pytest.approx(2 / 3)

    def test_reruns_are_byte_identical(self, tmp_path, capsys):
        paths = [tmp_path / f"r{i}.json" for i in range(2)]
        for p in paths:
            main(["run-amp", "--backend", "trajectories", "--ntraj", "500", "--seed", "7",
                  "--out", str(p)])
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestSweep:
    def test_golden(self, tmp_path):
        target = tmp_path / "sweep.csv"
        assert main(["sweep-nf", "--eta", "0.93", "--format", "csv", "--out", str(target)]) == 0
        assert target.read_bytes() == (GOLDEN / "sweep_nf_eta093.csv").read_bytes()

    def test_golden_values(self):
        rows = csv_rows((GOLDEN / "sweep_nf_eta093.csv").read_text())
        assert list(rows[0]) == SWEEP_HEADER
        for row in rows:
            G = float(row["G"])
            assert float(row["NF_ideal"]) == pytest.approx(nf_ideal(G), rel=1e-11)
            assert float(row["NF_detector"]) == pytest.approx(nf_detector(G, 0.93), rel=1e-11)
            assert float(row["NF_simulated_x"]) == pytest.approx(float(row["NF_detector"]))
        by_gain = {float(r["G"]): r for r in rows}
        assert float(by_gain[1.5]["NF_detector"]) == pytest.approx(0.7228, abs=1e-4)
        assert float(by_gain[100.0]["NF_detector"]) == pytest.approx(0.4675, abs=1e-4)
        assert float(by_gain[100.0]["NF_detector_dB"]) == pytest.approx(-3.30, abs=0.01)

    def test_custom_grid_json(self, capsys):
        _, out = run(["sweep-nf", "--set", "gains=1,4", "--ncl", "2"], capsys)
        rows = json.loads(out.out)["rows"]
        assert [r["G"] for r in rows] == [1.0, 4.0]
        assert rows[0]["NF_technical"] == pytest.approx(1 / 3)
        assert rows[1]["NF_simulated_x"] == pytest.approx(rows[1]["NF_technical"])


class TestSpectrumCommand:
    def summary(self, argv, capsys):
        code, out = run(["spectrum"] + argv, capsys)
        assert code == EXIT_OK
        return json.loads(out.out)["summary"]

    def test_demo(self, capsys):
        s = self.summary(["--T", "2/3"], capsys)
        assert s["peak_gain_x_db"] == pytest.approx(1.76, abs=0.2)
        assert s["floor_rise_x_db"] == pytest.approx(3.01, abs=0.2)

    def test_unit_gain(self, capsys):
        s = self.summary(["--T", "1"], capsys)
        assert s["floor_rise_x_db"] == pytest.approx(0.0, abs=1e-9)
        assert s["peak_gain_p_db"] == pytest.approx(0.0, abs=1e-9)

    def test_detector_loss(self, capsys):
        G, eta = 1.5, 0.93
        s = self.summary(["--T", "2/3", "--eta", "0.93"], capsys)
        assert s["floor_rise_x_db"] == pytest.approx(
            10 * math.log10(G / nf_detector(G, eta)), abs=0.2
        )

    def test_csv_layout(self, capsys):
        _, out = run(["spectrum", "--format", "csv"], capsys)
        assert out.out.startswith("# format: spectrum/1")
        rows = csv_rows(out.out)
        assert len(rows) > 10 and set(rows[0]) == {
            "frequency_hz", "input_x_db", "output_x_db", "input_p_db", "output_p_db"
        }

    def test_rbw_wider_than_span(self, capsys):
        code, _ = run(["spectrum", "--set", "rbw=200e3"], capsys)
        assert code == EXIT_INVALID


class TestPhaseConjugateCommand:
    def test_large_squeezing(self, capsys):
        _, out = run(["phase-conjugate", "--r", "5", "--T", "0.5"], capsys)
        conj = json.loads(out.out)["conjugate"]
        assert conj["cov"][0][0] == pytest.approx(3.0, abs=1e-3)
        assert conj["mean"][0] == pytest.approx(2.0, abs=1e-3)

    def test_conjugation_sign(self, capsys):
        argv = ["phase-conjugate", "--r", "5", "--T", "0.5", "--set", "alpha_re=0",
                "--set", "alpha_im=1"]
        _, out = run(argv, capsys)
        assert json.loads(out.out)["conjugate"]["mean"][1] == pytest.approx(-2.0, abs=1e-3)

    def test_no_squeezing_signal_unchanged(self, capsys):
        _, out = run(["phase-conjugate", "--r", "0", "--T", "0.5"], capsys)
        assert json.loads(out.out)["signal"]["cov_deviation"] < 1e-10


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "ffamp", "run-amp", "--T", "0.5"], capture_output=True, text=True
    )
    assert res.returncode == 0 and json.loads(res.stdout)["format"] == "run-amp/1"

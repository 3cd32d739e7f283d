import csv
import json
from pathlib import Path

import numpy as np
import pytest

from bladesim import cli
from bladesim.config import load_sweep
from bladesim.solver import NumericalError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def short_config(tmp_path, duration=0.05, **edits):
    data = json.loads((CONFIGS / "table2_crack.json").read_text())
    data["solver"]["duration"] = duration
    data.update(edits)
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(data))
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    out = tmp / "out"
    assert cli.main(["simulate", "--config", str(short_config(tmp)), "--out", str(out)]) == cli.EXIT_OK
    return out


class TestSimulate:
    def test_outputs(self, run_dir):
        header, data = read_csv(run_dir / "timeseries.csv")
        assert header[:3] == ["time", "stage0.disk.uY", "stage0.disk.uZ"]
        assert len(data) == 501
        rh, r = read_csv(run_dir / "radial_stage0.csv")
        assert rh == ["time", "radial"]
        assert np.all(np.isfinite(r[:, 1])) and np.all(r[:, 1] >= 0)
        assert np.allclose(r[:, 1], np.hypot(data[:, 1], data[:, 2]), rtol=1e-15)

    def test_manifest(self, run_dir):
        m = json.loads((run_dir / "run.json").read_text())
        assert m["format"] == "bladesim-scenario/1"
        d = m["derived"]
        assert d["free_dofs"] == 102
        assert d["rpm"] == pytest.approx(6000)
        assert d["stages"][0]["disk_thickness_m"] == 0.02
        assert d["rayleigh"]["a0"] > 0 and d["rayleigh"]["a1"] > 0

    def test_rerun_from_manifest_is_identical(self, run_dir, tmp_path):
        again = tmp_path / "again"
        assert cli.main(["simulate", "--config", str(run_dir / "run.json"), "--out", str(again)]) == 0
        for name in ("timeseries.csv", "run.json"):
            assert (again / name).read_bytes() == (run_dir / name).read_bytes()

    def test_unknown_key_exit_1(self, tmp_path, capsys):
        data = json.loads((CONFIGS / "table2_crack.json").read_text())
        data["stages"][0]["shaft"]["d_outt"] = 1
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(data))
        assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_INVALID
        assert "stages[0].shaft.d_outt" in capsys.readouterr().err

    def test_zero_duration_exit_1(self, tmp_path, capsys):
        p = short_config(tmp_path, duration=0.0)
        assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_INVALID
        assert "duration must be positive" in capsys.readouterr().err

    def test_numerical_failure_exit_2(self, tmp_path, monkeypatch):
        def fail(*a, **k):
            raise NumericalError("non-finite displacement")

        monkeypatch.setattr(cli, "simulate", fail)
        p = short_config(tmp_path)
        assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_NUMERICAL

    def test_unknown_channel_exit_1(self, tmp_path):
        p = short_config(tmp_path, outputs={"channels": ["stage0.disk.uQ"]})
        assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_INVALID


class TestModal:
    @pytest.mark.parametrize("case", ["blade", "shaft", "assembly"])
    def test_report(self, tmp_path, case):
        p = short_config(tmp_path)
        out = tmp_path / f"{case}.json"
        assert cli.main(["modal", "--config", str(p), "--case", case, "--count", "3", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["case"] == case and len(rep["frequencies_hz"]) == 3
        assert rep["boundary_conditions"]
        assert np.all(np.diff(rep["frequencies_hz"]) >= 0)

    def test_deterministic(self, tmp_path):
        p = short_config(tmp_path)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            cli.main(["modal", "--config", str(p), "--case", "blade", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_cracked_blade_not_stiffer(self, tmp_path):
        p = short_config(tmp_path)
        cracked = cli.modal_report(cli.load_scenario(p), "blade", 5, 0, 0)["frequencies_hz"]
        sound = cli.modal_report(cli.load_scenario(p), "blade", 5, 0, 1)["frequencies_hz"]
        assert all(c <= s for c, s in zip(cracked, sound))
        assert cracked[0] < sound[0]


class TestSpectrum:
    def test_single_spectrum(self, tmp_path):
        dt = 1e-3
        t = dt * np.arange(1000)
        src = tmp_path / "sig.csv"
        with open(src, "w") as fh:
            fh.write("time,x\n")
            for ti, xi in zip(t, 2.0 * np.cos(2 * np.pi * 50 * t)):
                fh.write(f"{float(ti)!r},{float(xi)!r}\n")
        out = tmp_path / "spec.csv"
        assert cli.main(["spectrum", "--input", str(src), "--channel", "x", "--out", str(out)]) == 0
        assert out.read_text().startswith("#")
        header, data = read_csv(out)
        assert header == ["frequency_hz", "amplitude", "phase_rad"]
        k = np.argmax(data[:, 1])
        assert data[k, 0] == pytest.approx(50.0) and data[k, 1] == pytest.approx(2.0, rel=1e-9)

    def test_stft_of_simulation(self, run_dir, tmp_path):
        out = tmp_path / "sg.csv"
        args = ["spectrum", "--input", str(run_dir / "radial_stage0.csv"), "--channel", "radial",
                "--stft", "--window", "0.02", "--overlap", "0.5", "--out", str(out)]
        assert cli.main(args) == 0
        header, data = read_csv(out)
        assert header[0] == "time" and float(header[1]) == 0.0
        assert data.shape == (1 + (501 - 200) // 100, 1 + 101)

    def test_missing_channel(self, run_dir, tmp_path, capsys):
        args = ["spectrum", "--input", str(run_dir / "timeseries.csv"), "--channel", "nope",
                "--out", str(tmp_path / "x.csv")]
        assert cli.main(args) == cli.EXIT_INVALID
        assert "nope" in capsys.readouterr().err

    def test_malformed_csv(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("time,x\n0.0,1.0\n0.1,abc\n")
        args = ["spectrum", "--input", str(src), "--channel", "x", "--out", str(tmp_path / "x.csv")]
        assert cli.main(args) == cli.EXIT_INVALID

    def test_window_too_long(self, run_dir, tmp_path):
        args = ["spectrum", "--input", str(run_dir / "radial_stage0.csv"), "--channel", "radial",
                "--stft", "--window", "5", "--out", str(tmp_path / "x.csv")]
        assert cli.main(args) == cli.EXIT_INVALID


class TestSweep:
    def sweep_file(self, tmp_path):
        base = short_config(tmp_path, duration=0.02)
        p = tmp_path / "sweep.json"
        p.write_text(json.dumps({"base": base.name, "axes": [
            {"path": "cracks[0].depth", "values": [0.005, 0.01]},
            {"path": "cracks[0].location", "values": [0.01, 0.05]}]}))
        return p

    def test_parallel_matches_serial(self, tmp_path):
        p = self.sweep_file(tmp_path)
        a, b = tmp_path / "serial", tmp_path / "parallel"
        assert cli.main(["sweep", "--config", str(p), "--out", str(a)]) == 0
        assert cli.main(["sweep", "--config", str(p), "--jobs", "3", "--out", str(b)]) == 0
        assert (a / "index.csv").read_bytes() == (b / "index.csv").read_bytes()
        for i in range(4):
            assert (a / f"run_{i:04d}/timeseries.csv").read_bytes() == (b / f"run_{i:04d}/timeseries.csv").read_bytes()

    def test_index_and_labels(self, tmp_path):
        p = self.sweep_file(tmp_path)
        out = tmp_path / "ds"
        cli.main(["sweep", "--config", str(p), "--out", str(out)])
        with open(out / "index.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(load_sweep(p)) == 4
        assert {r["status"] for r in rows} == {"ok"}
        lab = json.loads((out / "run_0003" / "labels.json").read_text())
        assert lab["axes"] == {"cracks[0].depth": 0.01, "cracks[0].location": 0.05}
        assert lab["damage"]["cracks"][0]["depth"] == 0.01

    def test_invalid_point_rejected_before_running(self, tmp_path):
        base = short_config(tmp_path, duration=0.02)
        p = tmp_path / "sweep.json"
        p.write_text(json.dumps({"base": base.name, "axes": [{"path": "cracks[0].depth", "values": [0.1]}]}))
        assert cli.main(["sweep", "--config", str(p), "--out", str(tmp_path / "ds")]) == cli.EXIT_INVALID
        assert not (tmp_path / "ds").exists()

    def test_bad_jobs(self, tmp_path):
        p = self.sweep_file(tmp_path)
        assert cli.main(["sweep", "--config", str(p), "--jobs", "0", "--out", str(tmp_path / "x")]) == 1

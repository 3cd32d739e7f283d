"""Command-line entry points: simulate, modal, spectrum and sweep.

Exit status is 0 on success, 1 for invalid input and 2 for a numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import RotorModel, blade_alone, boundary_description, shaft_alone
from .config import ConfigError, Scenario, load_scenario, load_sweep, manifest, parse_scenario
from .loads import total_blade_forces
from .sections import GeometryError, blade_section, disk_inertia
from .signals import radial, spectrum, stft
from .solver import NumericalError, damping_coefficients, default_channels, modal_analysis, simulate

log = logging.getLogger("bladesim")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
AMPLITUDE_NOTE = "single-sided amplitude; a unit sinusoid centred on a bin reads 1.0"


def _fmt(x) -> str:
    return repr(float(x))


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")


def _write_table(path: Path, header, columns, comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


def _derived(sc: Scenario, model: RotorModel) -> dict:
    """Paper-gap defaults and derived quantities, for the manifest."""
    stages = []
    for st in sc.stages:
        mass, polar = disk_inertia(st.disk, st.shaft, sc.model.disk_inertia_mass_form)
        f_c, f_l, f_d = total_blade_forces(st.blades, sc.aero, sc.material, st.disk.d_disk, sc.rpm.omega_target)
        stages.append({
            "disk_mass_kg": mass,
            "disk_polar_inertia": polar,
            "disk_thickness_m": st.disk.thickness,
            "chord_m": sc.aero.chord_for(st.blades),
            "blade_area_m2": blade_section(st.blades).area,
            "blade_forces_at_target_speed_N": {"centrifugal": f_c, "lift": f_l, "drag": f_d},
        })
    return {
        "shear_modulus_pa": sc.material.G,
        "rpm": sc.rpm.omega_target * 60.0 / (2.0 * math.pi),
        "boundary_conditions": boundary_description(sc.model),
        "rayleigh": {"a0": model.a0, "a1": model.a1},
        "free_dofs": model.n_free,
        "stages": stages,
        "notes": [
            "disk thickness defaults to 0.02 m, a placeholder not given by the source data",
            "indices of stages and blades are 0-based",
        ],
    }


def channels_for(sc: Scenario) -> list[str]:
    chans = list(sc.outputs.channels)
    for ch in default_channels(len(sc.stages)):
        if ch not in chans:
            chans.append(ch)
    return chans


def run_simulation(sc: Scenario, out: Path) -> None:
    """Simulate ``sc`` and write ``timeseries.csv``, ``radial_stage<k>.csv`` and ``run.json``."""
    out.mkdir(parents=True, exist_ok=True)
    chans = channels_for(sc)
    ts = simulate(sc, chans)
    t = ts.time
    _write_table(out / "timeseries.csv", ["time", *chans], [t, *(ts[c] for c in chans)])
    for s in range(len(sc.stages)):
        r = radial(ts[f"stage{s}.disk.uY"], ts[f"stage{s}.disk.uZ"])
        _write_table(out / f"radial_stage{s}.csv", ["time", "radial"], [t, r])
    model = RotorModel.from_scenario(sc)
    model.a0, model.a1 = damping_coefficients(model, sc.damping)
    _write_json(out / "run.json", manifest(sc, _derived(sc, model)))


def cmd_simulate(args) -> int:
    sc = load_scenario(args.config)
    run_simulation(sc, Path(args.out))
    return EXIT_OK


def modal_report(sc: Scenario, case: str, count: int, stage: int = 0, blade: int = 0) -> dict:
    if count < 1:
        raise ConfigError("count must be at least 1")
    if case == "blade":
        if not 0 <= stage < len(sc.stages):
            raise ConfigError(f"stage {stage} out of range")
        bg = sc.stages[stage].blades
        crack = next((c for c in sc.cracks if (c.stage, c.blade) == (stage, blade)), None)
        system = blade_alone(bg, sc.material, crack, sc.model)
        bc = f"blade {blade} of stage {stage} clamped at its root, not rotating"
        if crack is not None:
            bc += f"; crack depth {crack.depth} m at {crack.location} m"
    elif case == "shaft":
        system = shaft_alone(sc.stages, sc.material, sc.model)
        bc = boundary_description(sc.model) + "; bare shaft without disks or blades"
    elif case == "assembly":
        system = RotorModel.from_scenario(sc).system(0.0)
        bc = boundary_description(sc.model) + "; full assembly at rest"
    else:
        raise ConfigError(f"unknown case {case!r}")
    freqs, _ = modal_analysis(system, count)
    return {"case": case, "frequencies_hz": [float(f) for f in freqs], "boundary_conditions": bc}


def cmd_modal(args) -> int:
    sc = load_scenario(args.config)
    report = modal_report(sc, args.case, args.count, args.stage, args.blade)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_json(out, report)
    return EXIT_OK


def _read_channel(path, name):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ConfigError(f"{path}: empty file")
    header = rows[0]
    if "time" not in header:
        raise ConfigError(f"{path}: no 'time' column")
    if name not in header:
        raise ConfigError(f"channel {name!r} not in {path} (have {', '.join(header[1:])})")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if len(data) < 2:
        raise ConfigError(f"{path}: need at least two samples")
    t = data[:, header.index("time")]
    dt = float(np.mean(np.diff(t)))
    if not dt > 0 or np.max(np.abs(np.diff(t) - dt)) > 1e-6 * dt:
        raise ConfigError(f"{path}: samples are not uniformly spaced")
    x = data[:, header.index(name)]
    finite = np.isfinite(x)
    if not finite.all():
        x = x[: np.argmin(finite)]  # channels of severed DOFs end in NaN
    return t[0], dt, x


def cmd_spectrum(args) -> int:
    t0, dt, x = _read_channel(args.input, args.channel)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.stft:
        if not 0 <= args.overlap < 1:
            raise ConfigError("overlap must lie in [0, 1)")
        n = max(2, int(round(args.window / dt)))
        if n > len(x):
            raise ConfigError(f"window of {n} samples exceeds the signal length {len(x)}")
        hop = max(1, int(round(n * (1.0 - args.overlap))))
        sg = stft(x, dt, n, hop)
        header = ["time", *(f"{f:.10g}" for f in sg.frequencies)]
        cols = [t0 + sg.times, *sg.grid.T]
        _write_table(out, header, cols, f"{AMPLITUDE_NOTE}; Hann window {n} samples, hop {hop}")
    else:
        sp = spectrum(x, dt)
        _write_table(out, ["frequency_hz", "amplitude", "phase_rad"], [sp.frequencies, sp.amplitude, sp.phase],
                     AMPLITUDE_NOTE)
    return EXIT_OK


def _sweep_one(job):
    index, labels, data, out = job
    run_dir = Path(out) / f"run_{index:04d}"
    try:
        sc = parse_scenario(data)
        run_simulation(sc, run_dir)
        damage = {
            "cracks": [dataclasses.asdict(c) for c in sc.cracks],
            "fbo": [dataclasses.asdict(e) for e in sc.fbo],
            "fod": [dataclasses.asdict(e) for e in sc.fod],
        }
        _write_json(run_dir / "labels.json", {"axes": labels, "damage": damage})
        return index, "ok", ""
    except (ConfigError, GeometryError) as exc:
        return index, "invalid", str(exc)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return index, "numerical", str(exc)


def run_sweep(spec, out: Path, jobs: int = 1) -> list[tuple]:
    """Run every sweep point into ``out/run_NNNN`` and write ``out/index.csv``."""
    out.mkdir(parents=True, exist_ok=True)
    points = list(spec.combinations())
    work = [(i, labels, data, str(out)) for i, (labels, data) in enumerate(points)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_one, work))
    else:
        results = [_sweep_one(w) for w in work]
    paths = [a.path for a in spec.axes]
    with open(out / "index.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "directory", *paths, "status", "message"])
        for (i, status, msg), (labels, _) in zip(results, points):
            w.writerow([i, f"run_{i:04d}", *(json.dumps(labels[p]) for p in paths), status, msg])
    return results


def cmd_sweep(args) -> int:
    if args.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    spec = load_sweep(args.config)
    results = run_sweep(spec, Path(args.out), args.jobs)
    failed = [r for r in results if r[1] != "ok"]
    for i, status, msg in failed:
        print(f"run_{i:04d}: {status}: {msg}", file=sys.stderr)
    if any(r[1] == "numerical" for r in failed):
        return EXIT_NUMERICAL
    return EXIT_INVALID if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bladesim", description="Reduced-order bladed rotor fault simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a scenario in time")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("modal", help="natural frequencies of the blade, shaft or assembly")
    m.add_argument("--config", required=True)
    m.add_argument("--case", choices=("blade", "shaft", "assembly"), required=True)
    m.add_argument("--count", type=int, default=5)
    m.add_argument("--stage", type=int, default=0, help="stage of the blade case (0-based)")
    m.add_argument("--blade", type=int, default=0, help="blade of the blade case (0-based)")
    m.add_argument("--out", required=True, help="output JSON file")
    m.set_defaults(func=cmd_modal)

    f = sub.add_parser("spectrum", help="amplitude/phase spectrum or spectrogram of a CSV channel")
    f.add_argument("--input", required=True)
    f.add_argument("--channel", required=True)
    f.add_argument("--stft", action="store_true", help="moving-window spectrogram instead of one spectrum")
    f.add_argument("--window", type=float, default=0.1, help="window length in seconds")
    f.add_argument("--overlap", type=float, default=0.5, help="window overlap fraction")
    f.add_argument("--out", required=True, help="output CSV file")
    f.set_defaults(func=cmd_spectrum)

    w = sub.add_parser("sweep", help="run a Cartesian parameter sweep")
    w.add_argument("--config", required=True, help="sweep JSON file")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", required=True, help="dataset directory")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, GeometryError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

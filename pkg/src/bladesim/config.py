"""Scenario description, strict JSON parsing and parameter sweeps.

All quantities are SI and angles are radians. Speeds may be given either as
``omega_target`` (rad/s) or as ``rpm``; the resolved scenario always carries
``omega_target``. Blade and stage indices are 0-based.
"""

from __future__ import annotations

import copy
import dataclasses
import itertools
import json
import math
import re
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .assembly import ModelOptions, RpmProfile, Stage
from .loads import AeroEnvironment
from .sections import BladeGeometry, CrackSpec, DiskGeometry, GeometryError, MaterialProperties, ShaftGeometry
from .solver import DampingSpec, FboEvent, FodEvent, SolverSettings

__all__ = [
    "ConfigError",
    "OutputSpec",
    "Scenario",
    "SweepAxis",
    "SweepSpec",
    "DEFAULT_DISK_THICKNESS",
    "parse_scenario",
    "load_scenario",
    "scenario_to_dict",
    "manifest",
    "parse_sweep",
    "load_sweep",
    "set_path",
    "table2_scenario",
]

# not given by the source data; a placeholder surfaced in every manifest
DEFAULT_DISK_THICKNESS = 0.02
FORMAT = "bladesim-scenario/1"


class ConfigError(ValueError):
    """Invalid scenario or sweep description; the message names the field."""


@dataclass(frozen=True)
class OutputSpec:
    """Recorded DOF labels and spectrogram settings.

    ``channels`` are labels like ``stage0.disk.uY``; the disk ``uY``/``uZ``
    of every stage are always recorded as well, for the radial outputs.
    """

    channels: tuple = ()
    stft_window: float = 0.1
    stft_overlap: float = 0.5

    def __post_init__(self):
        if not self.stft_window > 0:
            raise GeometryError("stft_window must be positive")
        if not 0 <= self.stft_overlap < 1:
            raise GeometryError("stft_overlap must lie in [0, 1)")


@dataclass(frozen=True)
class Scenario:
    stages: tuple
    material: MaterialProperties = field(default_factory=MaterialProperties)
    aero: AeroEnvironment = field(default_factory=AeroEnvironment)
    rpm: RpmProfile = field(default_factory=RpmProfile)
    cracks: tuple = ()
    fbo: tuple = ()
    fod: tuple = ()
    solver: SolverSettings = field(default_factory=SolverSettings)
    damping: DampingSpec = field(default_factory=DampingSpec)
    model: ModelOptions = field(default_factory=ModelOptions)
    outputs: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        _validate(self)


_STAGE_FIELDS = {"shaft": ShaftGeometry, "disk": DiskGeometry, "blades": BladeGeometry}
_SECTIONS = {
    "material": MaterialProperties,
    "aero": AeroEnvironment,
    "rpm": RpmProfile,
    "solver": SolverSettings,
    "damping": DampingSpec,
    "model": ModelOptions,
    "outputs": OutputSpec,
}
_EVENTS = {"cracks": CrackSpec, "fbo": FboEvent, "fod": FodEvent}
_TOP = {"stages", *_SECTIONS, *_EVENTS}


def _validate(sc: Scenario):
    if not 1 <= len(sc.stages) <= 2:
        raise ConfigError("stages: one or two stages are supported")
    dur = sc.solver.duration
    for name in ("fbo", "fod"):
        for i, ev in enumerate(getattr(sc, name)):
            if not 0 <= ev.time <= dur:
                raise ConfigError(f"{name}[{i}].time: {ev.time} lies outside [0, duration={dur}]")
    for name in ("cracks", "fbo", "fod"):
        for i, ev in enumerate(getattr(sc, name)):
            if not 0 <= ev.stage < len(sc.stages):
                raise ConfigError(f"{name}[{i}].stage: index {ev.stage} out of range (0-based)")
            blades = sc.stages[ev.stage].blades
            if not 0 <= ev.blade < blades.count:
                raise ConfigError(f"{name}[{i}].blade: index {ev.blade} out of range (0-based, {blades.count} blades)")
    seen = set()
    for i, ev in enumerate(sc.fbo):
        key = (ev.stage, ev.blade)
        if key in seen:
            raise ConfigError(f"fbo[{i}]: more than one blade-off on stage {ev.stage} blade {ev.blade}")
        seen.add(key)
        if ev.break_location >= sc.stages[ev.stage].blades.length:
            raise ConfigError(f"fbo[{i}].break_location: must be shorter than the blade")
    seen = set()
    for i, c in enumerate(sc.cracks):
        key = (c.stage, c.blade)
        if key in seen:
            raise ConfigError(f"cracks[{i}]: more than one crack on stage {c.stage} blade {c.blade}")
        seen.add(key)
        bg = sc.stages[c.stage].blades
        if c.depth >= bg.width:
            raise ConfigError(f"cracks[{i}].depth: {c.depth} must be below the blade width {bg.width}; "
                              "model a severed blade as a blade-off")
        if c.location > bg.length:
            raise ConfigError(f"cracks[{i}].location: {c.location} lies beyond the blade length {bg.length}")
    if sc.damping.zeta > 0:
        n_modes = max(sc.damping.mode_pair)
        if n_modes > 6 * (1 + sum(st.blades.count * st.blades.n_elements for st in sc.stages)):
            raise ConfigError("damping.mode_pair: mode number exceeds the model size")


# ----------------------------------------------------------------------
# parsing

def _hint(cls, name):
    return typing.get_type_hints(cls)[name]


def _coerce(value, hint, path):
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        hint = next(a for a in args if a is not type(None))
        origin = typing.get_origin(hint)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true or false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if hint is tuple or origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return tuple(value)
    return value


def _build(cls, data, path, extra=()):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names and key not in extra:
            raise ConfigError(f"{path}.{key}: unknown field")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], _hint(cls, f.name), f"{path}.{f.name}")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        missing = [f.name for f in dataclasses.fields(cls)
                   if f.name not in kwargs and f.default is dataclasses.MISSING
                   and f.default_factory is dataclasses.MISSING]
        if missing:
            raise ConfigError(f"{path}.{missing[0]}: required field missing") from None
        raise ConfigError(f"{path}: {exc}") from None
    except GeometryError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_rpm(data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    data = dict(data)
    if "rpm" in data:
        if "omega_target" in data:
            raise ConfigError(f"{path}: give either rpm or omega_target, not both")
        rpm = _coerce(data.pop("rpm"), float, f"{path}.rpm")
        data["omega_target"] = rpm * 2.0 * math.pi / 60.0
    return _build(RpmProfile, data, path)


def _parse_stage(data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in data:
        if key not in _STAGE_FIELDS:
            raise ConfigError(f"{path}.{key}: unknown field")
    parts = {}
    for key, cls in _STAGE_FIELDS.items():
        if key not in data:
            raise ConfigError(f"{path}.{key}: required field missing")
        sub = data[key]
        if key == "disk" and isinstance(sub, dict) and "thickness" not in sub:
            sub = {**sub, "thickness": DEFAULT_DISK_THICKNESS}
        parts[key] = _build(cls, sub, f"{path}.{key}")
    try:
        return Stage(**parts)
    except GeometryError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_scenario(data: dict) -> Scenario:
    """Build a validated :class:`Scenario` from plain JSON data.

    Accepts a bare scenario object or a ``run.json`` manifest (whose
    ``scenario`` entry is used). Unknown keys are errors naming their path.
    """
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    if "scenario" in data:
        for key in data:
            if key not in ("scenario", "format", "derived"):
                raise ConfigError(f"{key}: unknown field")
        data = data["scenario"]
        if not isinstance(data, dict):
            raise ConfigError("scenario: expected an object")
    for key in data:
        if key not in _TOP:
            raise ConfigError(f"{key}: unknown field")
    if "stages" not in data:
        raise ConfigError("stages: required field missing")
    if not isinstance(data["stages"], list):
        raise ConfigError("stages: expected a list")
    kwargs = {"stages": tuple(_parse_stage(s, f"stages[{i}]") for i, s in enumerate(data["stages"]))}
    for key, cls in _SECTIONS.items():
        if key in data:
            kwargs[key] = _parse_rpm(data[key], key) if key == "rpm" else _build(cls, data[key], key)
    for key, cls in _EVENTS.items():
        if key in data:
            if not isinstance(data[key], list):
                raise ConfigError(f"{key}: expected a list")
            kwargs[key] = tuple(_build(cls, e, f"{key}[{i}]") for i, e in enumerate(data[key]))
    if "outputs" in kwargs:
        kwargs["outputs"] = dataclasses.replace(kwargs["outputs"], channels=tuple(kwargs["outputs"].channels))
    try:
        return Scenario(**kwargs)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from None


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_scenario(path) -> Scenario:
    return parse_scenario(_read_json(path))


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def scenario_to_dict(sc: Scenario) -> dict:
    """Fully resolved scenario, every default spelled out, re-parseable."""
    return _plain(sc)


def manifest(sc: Scenario, derived: dict | None = None) -> dict:
    """``run.json`` content: the resolved scenario plus informational derived values."""
    return {"format": FORMAT, "scenario": scenario_to_dict(sc), "derived": derived or {}}


# ----------------------------------------------------------------------
# sweeps

_TOKEN = re.compile(r"([A-Za-z_]\w*)|\[(\d+)\]")


def _tokens(path: str):
    out = []
    for part in path.split("."):
        parts = _TOKEN.findall(part)
        if not parts or "".join(n or f"[{i}]" for n, i in parts) != part:
            raise ConfigError(f"sweep path {path!r}: cannot parse {part!r}")
        out += [name if name else int(idx) for name, idx in parts]
    return out


def set_path(data: dict, path: str, value):
    """Return a copy of ``data`` with ``path`` (e.g. ``cracks[0].depth``) set to ``value``.

    Intermediate lists and objects must exist; the leaf may be a field left
    at its default. Field names are checked when the result is parsed.
    """
    out = copy.deepcopy(data)
    toks = _tokens(path)
    node = out
    for k, tok in enumerate(toks[:-1]):
        nxt = toks[k + 1]
        if isinstance(tok, int):
            if not isinstance(node, list) or tok >= len(node):
                raise ConfigError(f"sweep path {path!r}: index {tok} does not exist")
            node = node[tok]
        else:
            if not isinstance(node, dict):
                raise ConfigError(f"sweep path {path!r}: {tok!r} is not an object field")
            if tok not in node:
                if isinstance(nxt, int) or tok not in _TOP | set(_STAGE_FIELDS):
                    raise ConfigError(f"sweep path {path!r}: {tok!r} does not exist")
                node[tok] = {}
            node = node[tok]
    last = toks[-1]
    if isinstance(last, int):
        if not isinstance(node, list) or last >= len(node):
            raise ConfigError(f"sweep path {path!r}: index {last} does not exist")
    elif not isinstance(node, dict):
        raise ConfigError(f"sweep path {path!r}: {last!r} is not an object field")
    node[last] = value
    return out


@dataclass(frozen=True)
class SweepAxis:
    path: str
    values: tuple


@dataclass(frozen=True)
class SweepSpec:
    """Base scenario (as JSON data) and the axes of a Cartesian parameter sweep."""

    base: dict
    axes: tuple = ()

    def combinations(self):
        """``(labels, scenario_data)`` for every point, in row-major axis order."""
        grids = [a.values for a in self.axes]
        for combo in itertools.product(*grids):
            data = self.base
            labels = {}
            for axis, value in zip(self.axes, combo):
                data = set_path(data, axis.path, value)
                labels[axis.path] = value
            yield labels, data

    def __len__(self):
        return math.prod(len(a.values) for a in self.axes)


def parse_sweep(data: dict, root: Path | None = None) -> SweepSpec:
    """Parse ``{"base": <scenario or path>, "axes": [{"path": ..., "values": [...]}]}``.

    Every combination is parsed up front, so a path that does not resolve or
    a value that fails validation is reported before anything runs.
    """
    if not isinstance(data, dict):
        raise ConfigError("sweep: expected a JSON object")
    for key in data:
        if key not in ("base", "axes"):
            raise ConfigError(f"{key}: unknown field")
    if "base" not in data:
        raise ConfigError("base: required field missing")
    base = data["base"]
    if isinstance(base, str):
        base = _read_json((root or Path(".")) / base)
    if isinstance(base, dict) and "scenario" in base:
        base = base["scenario"]
    parse_scenario(base)
    axes = []
    raw = data.get("axes", [])
    if not isinstance(raw, list):
        raise ConfigError("axes: expected a list")
    for i, ax in enumerate(raw):
        if not isinstance(ax, dict) or set(ax) != {"path", "values"}:
            raise ConfigError(f"axes[{i}]: expected an object with exactly 'path' and 'values'")
        if not isinstance(ax["values"], list) or not ax["values"]:
            raise ConfigError(f"axes[{i}].values: expected a non-empty list")
        if not isinstance(ax["path"], str):
            raise ConfigError(f"axes[{i}].path: expected a string")
        axes.append(SweepAxis(ax["path"], tuple(ax["values"])))
    spec = SweepSpec(base, tuple(axes))
    for labels, scenario in spec.combinations():
        try:
            parse_scenario(scenario)
        except ConfigError as exc:
            raise ConfigError(f"sweep point {labels}: {exc}") from None
    return spec


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    return parse_sweep(_read_json(path), path.parent)


def table2_scenario(**overrides) -> Scenario:
    """Single-stage scenario with the reference system parameters.

    Keyword arguments replace top-level scenario fields.
    """
    stage = Stage(
        ShaftGeometry(0.025, 0.015, 0.5, 1),
        DiskGeometry(0.35, DEFAULT_DISK_THICKNESS, 4430.0),
        BladeGeometry(0.04, 0.00515, 0.00065, 0.4, 2, 8, 0.3),
    )
    kwargs = {"stages": (stage,), "rpm": RpmProfile(6000 * 2.0 * math.pi / 60.0, 0.2)}
    kwargs.update(overrides)
    return Scenario(**kwargs)

"""Newmark time marching, modal analysis and damage events."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .assembly import RotorModel, SystemMatrices, rayleigh_coefficients, rotation_block
from .sections import GeometryError
from .signals import TimeSeries

__all__ = [
    "SolverSettings",
    "DampingSpec",
    "FodEvent",
    "FboEvent",
    "State",
    "NumericalError",
    "newmark_step",
    "modal_analysis",
    "fod_force",
    "initial_state",
    "simulate",
    "default_channels",
]

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Singular effective stiffness or a failed eigen-solution."""


@dataclass(frozen=True)
class SolverSettings:
    dt: float = 1e-4
    duration: float = 1.0
    alpha: float = 0.5
    beta: float = 0.25

    def __post_init__(self):
        if not self.dt > 0:
            raise GeometryError("dt must be positive")
        if not self.duration > 0:
            raise GeometryError("duration must be positive")
        if not 0 <= self.alpha <= 1:
            raise GeometryError("alpha must lie in [0, 1]")
        if not self.beta > 0:
            raise GeometryError("beta must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class DampingSpec:
    """Rayleigh damping ratio and the two (1-based) assembled modes it is anchored to."""

    zeta: float = 0.02
    mode_pair: tuple = (1, 5)

    def __post_init__(self):
        if self.zeta < 0:
            raise GeometryError("zeta must be non-negative")
        i, j = self.mode_pair
        if i < 1 or j < 1 or i == j:
            raise GeometryError("mode_pair needs two distinct 1-based mode numbers")


@dataclass(frozen=True)
class FodEvent:
    """Foreign-object impact on a blade tip, optionally leaving the object stuck there."""

    time: float
    stage: int
    blade: int
    mass: float
    velocity: float
    contact_time: float = 0.04
    stick: bool = False

    def __post_init__(self):
        if not self.contact_time > 0:
            raise GeometryError("contact_time must be positive")
        if self.mass < 0 or self.velocity < 0:
            raise GeometryError("FOD mass and velocity must be non-negative")
        if self.time < 0:
            raise GeometryError("FOD time must be non-negative")


@dataclass(frozen=True)
class FboEvent:
    """Blade-off: the blade is cut ``break_location`` metres from its root at ``time``."""

    time: float
    stage: int
    blade: int
    break_location: float

    def __post_init__(self):
        if not self.break_location > 0:
            raise GeometryError("break_location must be positive")
        if self.time < 0:
            raise GeometryError("FBO time must be non-negative")


@dataclass(frozen=True)
class State:
    time: float
    displacement: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray


def _velocity_matrix(system: SystemMatrices) -> np.ndarray:
    if system.mass_rate is None:
        return system.damping
    return system.damping + system.mass_rate


def _newmark_operators(system: SystemMatrices, settings: SolverSettings):
    dt, al, be = settings.dt, settings.alpha, settings.beta
    c0 = 1.0 / (be * dt * dt)
    c1 = al / (be * dt)
    C = _velocity_matrix(system)
    k_eff = system.stiffness + c0 * system.mass + c1 * C
    try:
        if system.mass_rate is None and not system.corotating:
            factor = ("sym", k_eff)
        else:
            factor = ("lu", linalg.lu_factor(k_eff, check_finite=False))
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("effective stiffness is singular; check dt and constraints") from exc
    return C, factor


def newmark_step(system: SystemMatrices, state: State, f_next, settings: SolverSettings,
                 _operators=None) -> State:
    """Advance one step of size ``settings.dt`` with the Newmark scheme.

    ``system`` holds the matrices at the end of the step and ``f_next`` the
    load there. A ``mass_rate`` on the system enters like damping.
    Nonsymmetric (mass-rate or co-rotating) systems use a general LU solve.
    """
    M = system.mass
    u, v, a = state.displacement, state.velocity, state.acceleration
    if M.shape[0] != u.shape[0]:
        raise ValueError("system and state dimensions differ")
    C, (kind, factor) = _operators if _operators is not None else _newmark_operators(system, settings)
    dt, al, be = settings.dt, settings.alpha, settings.beta
    c0 = 1.0 / (be * dt * dt)
    c1 = al / (be * dt)
    rhs = (np.asarray(f_next, dtype=float)
           + M @ (c0 * u + v / (be * dt) + (0.5 / be - 1.0) * a)
           + C @ (c1 * u + (al / be - 1.0) * v + 0.5 * dt * (al / be - 2.0) * a))
    try:
        if kind == "sym":
            u1 = linalg.solve(factor, rhs, assume_a="sym", check_finite=False)
        else:
            u1 = linalg.lu_solve(factor, rhs, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError("effective stiffness is singular; check dt and constraints") from exc
    if not np.all(np.isfinite(u1)):
        raise NumericalError(f"non-finite displacement at t={state.time + dt:.6g} s")
    a1 = c0 * (u1 - u) - v / (be * dt) - (0.5 / be - 1.0) * a
    v1 = v + dt * ((1.0 - al) * a + al * a1)
    return State(state.time + dt, u1, v1, a1)


def modal_analysis(system: SystemMatrices, count: int | None = None, tol: float = 1e-6):
    """Natural frequencies (Hz, ascending) and mass-normalised mode shapes.

    Solves ``K phi = w^2 M phi``. Raises :class:`NumericalError` if the
    normwise backward error of any returned pair exceeds ``tol``.
    """
    K, M = system.stiffness, system.mass
    n = K.shape[0]
    count = n if count is None else min(count, n)
    # symmetric diagonal scaling evens out translational and rotational units
    d = np.diag(M)
    s = 1.0 / np.sqrt(np.where(d > 0, d, 1.0))
    try:
        lam, psi = linalg.eigh(s[:, None] * K * s, s[:, None] * M * s, subset_by_index=[0, count - 1])
    except linalg.LinAlgError as exc:
        raise NumericalError(f"eigen-solution failed: {exc}") from exc
    phi = s[:, None] * psi
    res = np.linalg.norm(K @ phi - (M @ phi) * lam, axis=0)
    scale = (np.linalg.norm(K, 2) + abs(lam) * np.linalg.norm(M, 2)) * np.linalg.norm(phi, axis=0)
    rel = res / np.where(scale > 0, scale, 1.0)
    if np.any(rel > tol):
        raise NumericalError(f"eigen-solution residual {rel.max():.3e} exceeds {tol:g}")
    freqs = np.sqrt(np.clip(lam, 0.0, None)) / (2.0 * math.pi)
    return freqs, phi


def fod_force(event: FodEvent) -> float:
    """Impact force magnitude: momentum delivered over the contact time (N)."""
    if not event.contact_time > 0:
        raise GeometryError("contact_time must be positive")
    return event.velocity * event.mass / event.contact_time


def default_channels(n_stages: int) -> list[str]:
    return [f"stage{s}.disk.{d}" for s in range(n_stages) for d in ("uY", "uZ")]


def initial_state(system: SystemMatrices, u0=None, v0=None) -> State:
    """State at ``system.time`` with acceleration from dynamic equilibrium."""
    n = system.mass.shape[0]
    u0 = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float)
    v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float)
    a0 = linalg.solve(system.mass, system.force - _velocity_matrix(system) @ v0 - system.stiffness @ u0,
                      assume_a="pos")
    return State(system.time, u0, v0, a0)


# ----------------------------------------------------------------------
# blade-off state transfer

def _hermite_at(n1, n2, L, x):
    """Interpolate a local 6-vector inside a beam element at ``x``."""
    s = x / L
    H = np.array([1 - 3 * s**2 + 2 * s**3, L * (s - 2 * s**2 + s**3), 3 * s**2 - 2 * s**3, L * (s**3 - s**2)])
    dH = np.array([(-6 * s + 6 * s**2) / L, 1 - 4 * s + 3 * s**2, (6 * s - 6 * s**2) / L, 3 * s**2 - 2 * s])
    out = np.empty(6)
    out[0] = (1 - s) * n1[0] + s * n2[0]
    out[3] = (1 - s) * n1[3] + s * n2[3]
    v = np.array([n1[1], n1[5], n2[1], n2[5]])
    w = np.array([n1[2], -n1[4], n2[2], -n2[4]])
    out[1], out[5] = H @ v, dH @ v
    out[2], out[4] = H @ w, -(dH @ w)
    return out


def _transfer(old: RotorModel, new: RotorModel, t: float, vec: np.ndarray, cut: tuple, x_cut: float, el_len: float):
    """Map a free-DOF vector of ``old`` onto ``new`` after a blade is cut."""
    out = np.zeros(new.n_free)
    om, nm = old.dofmap, new.dofmap
    node_names = {}
    for name, node in nm.names.items():
        node_names.setdefault(node, name)
    s, b = cut
    new_nodes = nm.blade_nodes[cut]
    partial = len(new_nodes) - 1  # element index (1-based) of the new last element
    for node, name in node_names.items():
        fi_new = nm.node_free_indices(node)
        keep = fi_new >= 0
        if node == new_nodes[-1] and x_cut < el_len * (1 - 1e-9):
            # node moved to the cut: interpolate inside the old element
            local = old.blade_local_state(s, b, t, vec)
            loc = _hermite_at(local[partial - 1], local[partial], el_len, x_cut)
            R = rotation_block(old.rpm.angle(t) + 2.0 * math.pi * b / old.stages[s].blades.count)
            g = np.concatenate([R.T @ loc[:3], R.T @ loc[3:]])
        else:
            fi_old = om.node_free_indices(om.names[name])
            g = np.where(fi_old >= 0, vec[np.maximum(fi_old, 0)], 0.0)
        out[fi_new[keep]] = g[keep]
    return out


def _apply_fbo(model: RotorModel, state: State, ev: FboEvent, tip_masses: dict, truncations: dict):
    blade = model.stages[ev.stage].blades
    if ev.break_location >= blade.length:
        raise GeometryError("FBO break_location must be shorter than the blade")
    truncations = {**truncations, (ev.stage, ev.blade): ev.break_location}
    tip_masses = {k: v for k, v in tip_masses.items() if k != (ev.stage, ev.blade)}
    new = RotorModel(model.stages, model.material, model.aero, model.rpm, model.cracks,
                     model.options, truncations, tip_masses)
    new.a0, new.a1 = model.a0, model.a1
    le = blade.length / blade.n_elements
    start = le * math.floor(ev.break_location / le + 1e-9)
    x_cut = ev.break_location - start
    if x_cut < 1e-9 * le:
        x_cut = le  # cut on an existing node
    u = _transfer(model, new, state.time, state.displacement, (ev.stage, ev.blade), x_cut, le)
    v = _transfer(model, new, state.time, state.velocity, (ev.stage, ev.blade), x_cut, le)
    return new, u, v, truncations, tip_masses


def _rebuild(model: RotorModel, truncations, tip_masses):
    new = RotorModel(model.stages, model.material, model.aero, model.rpm, model.cracks,
                     model.options, truncations, tip_masses)
    new.a0, new.a1 = model.a0, model.a1
    return new


def damping_coefficients(model: RotorModel, damping: DampingSpec) -> tuple[float, float]:
    """Rayleigh factors anchored at the assembled modes of ``model`` at t = 0."""
    if damping.zeta == 0:
        return 0.0, 0.0
    i, j = damping.mode_pair
    freqs, _ = modal_analysis(model.system(0.0), max(i, j))
    w = 2.0 * math.pi * freqs
    return rayleigh_coefficients(damping.zeta, w[i - 1], w[j - 1])


def simulate(scenario, channels=None, progress=None) -> TimeSeries:
    """Integrate a scenario in time and record DOF histories.

    The unknowns are marched in shaft-fixed co-rotating coordinates
    ``q = R(theta)^T u``, an exact change of variables for the rotating
    assembly, in which the equations lose their angle dependence and become
    constant once the speed is. The average-acceleration scheme is then
    unconditionally stable, stiff blade modes included. Recorded channels
    are mapped back to the global frame.

    Blade-off events switch to a model with the shortened blade, carrying
    over the surviving DOFs; impacts add a rectangular force pulse along
    global -X at the blade tip and, when sticking, leave their mass there
    from the end of contact on. Channels of DOFs that no longer exist read NaN.
    """
    settings: SolverSettings = scenario.solver
    for ev in list(scenario.fbo) + list(scenario.fod):
        if not 0 <= ev.time <= settings.duration:
            raise GeometryError(f"event time {ev.time} outside [0, duration]")
    model = RotorModel.from_scenario(scenario)
    model.a0, model.a1 = damping_coefficients(model, scenario.damping)
    if channels is None:
        channels = list(getattr(scenario.outputs, "channels", ()) or default_channels(len(scenario.stages)))
    for ch in channels:
        model.dofmap.index(ch)  # fail early on bad labels

    n = settings.n_steps
    dt = settings.dt
    rec = {ch: np.full(n + 1, np.nan) for ch in channels}

    def record(k, mdl, st):
        u = mdl.to_fixed(st.time, st.displacement)
        for ch in channels:
            if mdl.dofmap.has(ch):
                rec[ch][k] = u[mdl.dofmap.index(ch)]

    cache = {}

    def step_system(mdl, t):
        key = (id(mdl), mdl.rpm.omega(t), mdl.rpm.omega_rate(t))
        if key not in cache:
            cache.clear()
            system = mdl.corotating_system(t)
            cache[key] = (system, _newmark_operators(system, settings))
        system, ops = cache[key]
        return replace(system, time=t, force=_fod_load(mdl, t, system.force, scenario.fod)), ops

    truncations, tip_masses = {}, {}
    pending_fbo = sorted(scenario.fbo, key=lambda e: e.time)
    pending_stick = sorted((e for e in scenario.fod if e.stick), key=lambda e: e.time + e.contact_time)

    state = initial_state(step_system(model, 0.0)[0])
    record(0, model, state)
    for k in range(1, n + 1):
        t0 = (k - 1) * dt
        t1 = k * dt
        changed = False
        while pending_fbo and pending_fbo[0].time <= t0 + 1e-12 * dt:
            ev = pending_fbo.pop(0)
            w = model.rpm.omega(t0)
            q, qd = state.displacement, state.velocity
            glob = State(t0, model.to_fixed(t0, q), model.to_fixed(t0, qd + w * model.generator(q)),
                         state.acceleration)
            model, u, v, truncations, tip_masses = _apply_fbo(model, glob, ev, tip_masses, truncations)
            q = model.to_rotating(t0, u)
            state = State(t0, q, model.to_rotating(t0, v) - w * model.generator(q), state.acceleration)
            changed = True
            log.info("blade-off on stage %d blade %d at t=%.4f s", ev.stage, ev.blade, t0)
        while pending_stick and pending_stick[0].time + pending_stick[0].contact_time <= t0 + 1e-12 * dt:
            ev = pending_stick.pop(0)
            if (ev.stage, ev.blade) in truncations and truncations[(ev.stage, ev.blade)] <= 0:
                continue
            key = (ev.stage, ev.blade)
            tip_masses = {**tip_masses, key: tip_masses.get(key, 0.0) + ev.mass}
            model = _rebuild(model, truncations, tip_masses)
            changed = True
        if changed:
            state = initial_state(step_system(model, t0)[0], state.displacement, state.velocity)
        system, ops = step_system(model, t1)
        state = newmark_step(system, state, system.force, settings, _operators=ops)
        record(k, model, state)
        if progress is not None:
            progress(k, n)
    return TimeSeries(dt, 0.0, rec)


def _fod_load(model: RotorModel, t: float, f: np.ndarray, fod_events) -> np.ndarray:
    """Add active impact pulses. Global -X is unchanged by the shaft rotation."""
    for ev in fod_events:
        if ev.time <= t < ev.time + ev.contact_time:
            f = f.copy()
            f[model.tip_axial_index(ev.stage, ev.blade)] -= fod_force(ev)
    return f


def _loaded(model: RotorModel, t: float, fod_events) -> SystemMatrices:
    """Global-frame system at ``t`` including active impact pulses."""
    system = model.system(t)
    f = _fod_load(model, t, system.force, fod_events)
    return replace(system, force=f) if f is not system.force else system

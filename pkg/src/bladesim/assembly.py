"""Global assembly of shaft, disks and rotating blades.

The shaft runs along global X from a clamped root. Each stage's disk and
blade ring sit at the end of that stage's shaft segment, and every blade
root shares the six DOFs of that shaft node. Blades are rotated into the
global frame with the time-dependent angle of :func:`blade_angle`.

Rotating a blade matrix by an angle ``theta`` about X is a trigonometric
polynomial of degree two in ``theta`` (degree one for load vectors), so the
rotating part of the global system is stored as five harmonic coefficient
matrices and evaluated per time step without re-transforming every blade.

Two terms beyond plain rotated matrices keep the spinning model bounded
(both can be switched off in :class:`ModelOptions`):

* spin stiffening: the centrifugal tension of each blade stiffens its
  bending, and the blade pull carried by the hub adds ``sum F_C r_root`` to
  the disk's twist stiffness. Without them a rigid rotation of the ring about
  the shaft axis is not neutral, and any mode whose in-plane mass sits below
  the spin speed diverges.
* the rate of change of the rotating mass matrix: the inertia force is
  ``d(M u')/dt``, not ``M u''``. With a consistent (anisotropic) blade mass
  the latter is not derivable from a kinetic energy and pumps energy in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .elements import CrackProfile, ElementContext, blade_element, geometric_stiffness, shaft_element
from .loads import centrifugal_tension, consistent_nodal_loads
from .sections import (
    BladeGeometry,
    CrackSpec,
    DiskGeometry,
    GeometryError,
    MaterialProperties,
    ShaftGeometry,
    blade_section,
    cracked_blade_section,
    disk_inertia,
    shaft_section,
)

__all__ = [
    "Stage",
    "RpmProfile",
    "ModelOptions",
    "DofMap",
    "SystemMatrices",
    "RotorModel",
    "blade_angle",
    "transformation",
    "rotation_block",
    "rayleigh_coefficients",
    "rayleigh_damping",
    "assemble",
    "blade_alone",
    "shaft_alone",
]

_NDOF = 6


@dataclass(frozen=True)
class Stage:
    shaft: ShaftGeometry
    disk: DiskGeometry
    blades: BladeGeometry

    def __post_init__(self):
        if self.disk.d_disk < self.shaft.d_out:
            raise GeometryError("disk diameter must exceed the shaft outer diameter")


@dataclass(frozen=True)
class RpmProfile:
    """Linear spin-up from rest to ``omega_target`` over ``ramp_time``, then constant."""

    omega_target: float = 2.0 * math.pi * 100.0
    ramp_time: float = 0.2

    def __post_init__(self):
        if self.omega_target < 0:
            raise GeometryError("omega_target must be non-negative")
        if self.ramp_time <= 0:
            raise GeometryError("ramp_time must be positive")

    def omega(self, t: float) -> float:
        return self.omega_target * min(max(t, 0.0) / self.ramp_time, 1.0)

    def omega_rate(self, t: float) -> float:
        """Angular acceleration, taken as zero from ``ramp_time`` on."""
        return self.omega_target / self.ramp_time if 0.0 <= t < self.ramp_time else 0.0

    def angle(self, t: float) -> float:
        """Shaft rotation angle, the time integral of :meth:`omega`."""
        w, tr = self.omega_target, self.ramp_time
        if t < tr:
            return w * t * t / (2.0 * tr)
        return w * tr / 2.0 + w * (t - tr)


@dataclass(frozen=True)
class ModelOptions:
    """Modelling choices the source formulation leaves open.

    ``boundary`` is ``"clamped"`` (all six root DOFs fixed) or ``"pinned"``
    (root translations and twist fixed). ``disk_translational_mass`` places
    the disk mass on the disk node translations; ``disk_inertia_mass_form``
    multiplies the disk polar moment by density and thickness.
    ``crack_length_scale`` overrides the blade width in the crack decay.
    ``spin_stiffening`` adds the centrifugal geometric stiffness and
    ``mass_rate`` the ``dM/dt u'`` inertia term; turning both off gives the
    bare rotated-matrix equations, which diverge at operating speed.
    """

    boundary: str = "clamped"
    disk_translational_mass: bool = True
    disk_inertia_mass_form: bool = True
    crack_length_scale: float | None = None
    quadrature_order: int = 16
    spin_stiffening: bool = True
    mass_rate: bool = True

    def __post_init__(self):
        if self.boundary not in ("clamped", "pinned"):
            raise GeometryError("boundary must be 'clamped' or 'pinned'")
        if self.crack_length_scale is not None and self.crack_length_scale <= 0:
            raise GeometryError("crack_length_scale must be positive")
        if self.quadrature_order < 1:
            raise GeometryError("quadrature_order must be >= 1")


def blade_angle(t: float, blade: int, count: int, profile: RpmProfile) -> float:
    """Absolute angle of blade ``blade`` (0-based) of a ring of ``count``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return profile.angle(t) + blade * 2.0 * math.pi / count


def rotation_block(theta: float) -> np.ndarray:
    """3x3 direction cosines taking global components to blade components.

    Rows are the blade axes X' (radial), Y' (chordwise, tangential) and
    Z' (through the thickness, along -X) expressed in global coordinates.
    """
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[0.0, -s, c], [0.0, c, s], [-1.0, 0.0, 0.0]])


def transformation(theta: float, nodes: int = 2) -> np.ndarray:
    """Block-diagonal transformation for a blade element (``u_local = T u_global``)."""
    return np.kron(np.eye(2 * nodes), rotation_block(theta))


@dataclass(frozen=True)
class DofMap:
    """Node and DOF bookkeeping for one assembled configuration.

    ``free`` lists the full-system indices that survive the boundary
    conditions, in order; ``names`` maps node names (and aliases such as
    ``stage0.disk`` or ``stage0.blade3.tip``) to node numbers.
    """

    n_nodes: int
    free: np.ndarray
    names: dict
    stage_nodes: tuple
    blade_nodes: dict

    @property
    def n_free(self) -> int:
        return len(self.free)

    def full_index(self, node: int, dof: str) -> int:
        return _NDOF * node + _dof_number(dof)

    def index(self, label: str) -> int:
        """Free-DOF index of a label like ``stage0.disk.uY``."""
        node_name, _, dof = label.rpartition(".")
        if node_name not in self.names:
            raise KeyError(f"unknown node {node_name!r} in DOF label {label!r}")
        full = self.full_index(self.names[node_name], dof)
        pos = np.searchsorted(self.free, full)
        if pos == len(self.free) or self.free[pos] != full:
            raise KeyError(f"DOF {label!r} is constrained")
        return int(pos)

    def has(self, label: str) -> bool:
        try:
            self.index(label)
        except KeyError:
            return False
        return True

    def node_free_indices(self, node: int) -> np.ndarray:
        """Free indices of a node's DOFs, -1 where constrained."""
        full = np.arange(_NDOF * node, _NDOF * node + _NDOF)
        pos = np.searchsorted(self.free, full)
        pos = np.minimum(pos, len(self.free) - 1)
        return np.where(self.free[pos] == full, pos, -1)


_DOFS = ("uX", "uY", "uZ", "thX", "thY", "thZ")


def _dof_number(dof: str) -> int:
    try:
        return _DOFS.index(dof)
    except ValueError:
        raise KeyError(f"unknown DOF {dof!r}; expected one of {_DOFS}") from None


@dataclass(frozen=True)
class SystemMatrices:
    mass: np.ndarray
    damping: np.ndarray
    stiffness: np.ndarray
    force: np.ndarray
    time: float
    a0: float = 0.0
    a1: float = 0.0
    mass_rate: np.ndarray | None = None  # dM/dt of the rotating mass matrix
    corotating: bool = False  # unknowns rotate with the shaft; damping and stiffness are nonsymmetric


def rayleigh_coefficients(zeta: float, w_i: float, w_j: float) -> tuple[float, float]:
    """Mass and stiffness proportional factors giving ratio ``zeta`` at ``w_i`` and ``w_j`` (rad/s)."""
    if w_i <= 0 or w_j <= 0:
        raise ValueError("anchor frequencies must be positive")
    if math.isclose(w_i, w_j, rel_tol=1e-9):
        raise ValueError("Rayleigh anchors must be distinct frequencies")
    return 2.0 * zeta * w_i * w_j / (w_i + w_j), 2.0 * zeta / (w_i + w_j)


def rayleigh_damping(M, K, zeta: float, mode_pair=(1, 5), frequencies=None):
    """Rayleigh damping ``C = a0 M + a1 K`` anchored at two modes (1-based).

    ``frequencies`` are circular natural frequencies in ascending order; they
    are computed from ``(K, M)`` when omitted. Returns ``(a0, a1, C)``.
    """
    i, j = mode_pair
    if frequencies is None:
        lam = linalg.eigh(K, M, eigvals_only=True, subset_by_index=[0, max(i, j) - 1])
        frequencies = np.sqrt(np.clip(lam, 0.0, None))
    a0, a1 = rayleigh_coefficients(zeta, frequencies[i - 1], frequencies[j - 1])
    return a0, a1, a0 * np.asarray(M) + a1 * np.asarray(K)


def _rotate_nodes(theta: float, n_nodes: int) -> np.ndarray:
    return np.kron(np.eye(2 * n_nodes), rotation_block(theta))


def _harmonics(sample, degree: int):
    """Fourier coefficients of a trig polynomial ``sample(theta)`` of the given degree.

    Returns ``[c0, c1, s1, c2, s2, ...]`` so that
    ``sample(t) = c0 + sum_k ck cos(k t) + sk sin(k t)``.
    """
    n = 2 * degree + 1
    angles = 2.0 * math.pi * np.arange(n) / n
    vals = [sample(a) for a in angles]
    out = [sum(vals) / n]
    for k in range(1, degree + 1):
        out.append(2.0 / n * sum(v * math.cos(k * a) for v, a in zip(vals, angles)))
        out.append(2.0 / n * sum(v * math.sin(k * a) for v, a in zip(vals, angles)))
    return out


def _basis(theta: float, degree: int) -> np.ndarray:
    b = [1.0]
    for k in range(1, degree + 1):
        b += [math.cos(k * theta), math.sin(k * theta)]
    return np.array(b)


@dataclass
class _Blade:
    stage: int
    index: int
    nodes: tuple
    offset_angle: float
    mass: np.ndarray       # local frame, (6n, 6n) including the root node
    stiffness: np.ndarray
    load_w2: np.ndarray    # local load per unit omega^2
    load_v: np.ndarray     # omega-independent local load
    geometric: np.ndarray  # local spin stiffening per unit omega^2
    hub_moment: float      # root pull times root radius per unit omega^2
    length: float
    tip_radius: float


class RotorModel:
    """Assembled single- or multi-stage bladed rotor.

    Parameters
    ----------
    stages : sequence of Stage
        Stages from root to tip; stage ``s`` sits at the end of shaft segment ``s``.
    material : MaterialProperties
        Shaft and blade material.
    aero : AeroEnvironment
    rpm : RpmProfile
    cracks : sequence of CrackSpec, optional
    options : ModelOptions, optional
    truncations : dict, optional
        ``{(stage, blade): remaining_length}`` for blades shortened by a blade-off.
    tip_masses : dict, optional
        ``{(stage, blade): kg}`` point masses stuck to blade tips. They add
        translational inertia and their own centrifugal load.
    """

    def __init__(self, stages, material, aero, rpm, cracks=(), options=None,
                 truncations=None, tip_masses=None):
        if not stages:
            raise GeometryError("at least one stage is required")
        self.stages = tuple(stages)
        self.material = material
        self.aero = aero
        self.rpm = rpm
        self.cracks = tuple(cracks)
        self.options = options or ModelOptions()
        self.truncations = dict(truncations or {})
        self.tip_masses = dict(tip_masses or {})
        self.a0 = 0.0
        self.a1 = 0.0
        self._build()

    @classmethod
    def from_scenario(cls, scenario, **kw):
        return cls(scenario.stages, scenario.material, scenario.aero, scenario.rpm,
                   scenario.cracks, scenario.model, **kw)

    def _crack_for(self, s, b):
        found = [c for c in self.cracks if c.stage == s and c.blade == b]
        if len(found) > 1:
            raise GeometryError(f"more than one crack on stage {s} blade {b}")
        return found[0] if found else None

    def _build(self):
        opts = self.options
        names = {}
        stage_nodes = []
        n_shaft = sum(st.shaft.n_elements for st in self.stages)
        n_nodes = n_shaft + 1
        for k in range(n_nodes):
            names[f"shaft.n{k}"] = k
        names["shaft.root"] = 0
        names["shaft.tip"] = n_shaft

        # shaft and disks: rotation invariant part
        shaft_blocks = []
        node = 0
        for s, st in enumerate(self.stages):
            sec = shaft_section(st.shaft)
            le = st.shaft.length / st.shaft.n_elements
            disk = disk_inertia(st.disk, st.shaft, mass_form=opts.disk_inertia_mass_form)
            for e in range(st.shaft.n_elements):
                ctx = ElementContext(e + 1, le, sec, self.material, st.shaft.length)
                em = shaft_element(ctx)
                shaft_blocks.append((node, em))
                node += 1
            stage_nodes.append(node)
            names[f"stage{s}.disk"] = node
            shaft_blocks.append((node, disk))

        blades = []
        for s, st in enumerate(self.stages):
            bg = st.blades
            sec = blade_section(bg)
            le = bg.length / bg.n_elements
            root_r = st.disk.d_disk / 2.0
            for b in range(bg.count):
                length = self.truncations.get((s, b), bg.length)
                if length <= 1e-12:
                    raise GeometryError(f"stage {s} blade {b} has no remaining length")
                if length > bg.length * (1 + 1e-12):
                    raise GeometryError(f"stage {s} blade {b} truncated beyond its length")
                crack = self._crack_for(s, b)
                profile = None
                if crack is not None:
                    if crack.location > bg.length:
                        raise GeometryError("crack location beyond the blade length")
                    profile = CrackProfile(
                        cracked_blade_section(bg, crack.depth), crack.location, crack.gamma0,
                        opts.crack_length_scale or bg.width,
                    )
                elems = []
                start = 0.0
                i = 1
                while start < length - 1e-12:
                    el = min(le, length - start)
                    if length - start - le < 1e-9 * le:
                        el = length - start
                    elems.append(ElementContext(i, el, sec, self.material, bg.length, profile, start))
                    start += el
                    i += 1
                nodes = [stage_nodes[s]]
                for k in range(len(elems)):
                    nodes.append(n_nodes)
                    names[f"stage{s}.blade{b}.n{k + 1}"] = n_nodes
                    n_nodes += 1
                names[f"stage{s}.blade{b}.root"] = nodes[0]
                names[f"stage{s}.blade{b}.tip"] = nodes[-1]
                nb = _NDOF * len(nodes)
                mb = np.zeros((nb, nb))
                kb = np.zeros((nb, nb))
                f2 = np.zeros(nb)
                fv = np.zeros(nb)
                kg = np.zeros((nb, nb))
                extra = self.tip_masses.get((s, b), 0.0)
                tension = centrifugal_tension(bg, self.material, st.disk.d_disk, 1.0, length, extra)
                for k, ctx in enumerate(elems):
                    em = blade_element(ctx, opts.quadrature_order)
                    sl = slice(_NDOF * k, _NDOF * k + 12)
                    mb[sl, sl] += em.mass
                    kb[sl, sl] += em.stiffness
                    one = consistent_nodal_loads(ctx, bg, self.aero, 1.0, st.disk.d_disk).values
                    zero = consistent_nodal_loads(ctx, bg, self.aero, 0.0, st.disk.d_disk).values
                    f2[sl] += one - zero
                    fv[sl] += zero
                    kg[sl, sl] += geometric_stiffness(ctx, tension)
                tip_r = root_r + length
                if extra:
                    f2[nb - _NDOF] += extra * tip_r  # centrifugal pull of the stuck mass
                blades.append(_Blade(s, b, tuple(nodes), b * 2.0 * math.pi / bg.count,
                                     mb, kb, f2, fv, kg, float(tension(0.0)) * root_r, length, tip_r))

        n_full = _NDOF * n_nodes
        m_fixed = np.zeros((n_full, n_full))
        k_fixed = np.zeros((n_full, n_full))
        for node, item in shaft_blocks:
            sl = slice(_NDOF * node, _NDOF * node + 12)
            if isinstance(item, tuple):
                md, jd = item
                base = _NDOF * node
                if opts.disk_translational_mass:
                    for d in range(3):
                        m_fixed[base + d, base + d] += md
                m_fixed[base + 3, base + 3] += jd
            else:
                m_fixed[sl, sl] += item.mass
                k_fixed[sl, sl] += item.stiffness
        for bl in blades:
            extra = self.tip_masses.get((bl.stage, bl.index), 0.0)
            base = _NDOF * bl.nodes[-1]
            for d in range(3):
                m_fixed[base + d, base + d] += extra

        fixed = [0, 1, 2, 3, 4, 5] if opts.boundary == "clamped" else [0, 1, 2, 3]
        free = np.setdiff1d(np.arange(n_full), fixed)

        self._blades = blades
        self._m_fixed = m_fixed
        self._k_fixed = k_fixed
        self.dofmap = DofMap(n_nodes, free, names, tuple(stage_nodes),
                             {(bl.stage, bl.index): bl.nodes for bl in blades})
        self._n_full = n_full

        # harmonic expansion of the rotating part in the shaft angle
        def scatter_mat(theta, attr):
            out = np.zeros((n_full, n_full))
            for bl in blades:
                idx = _dof_indices(bl.nodes)
                T = _rotate_nodes(theta + bl.offset_angle, len(bl.nodes))
                out[np.ix_(idx, idx)] += T.T @ getattr(bl, attr) @ T
            return out

        def scatter_vec(theta, attr):
            out = np.zeros(n_full)
            for bl in blades:
                idx = _dof_indices(bl.nodes)
                T = _rotate_nodes(theta + bl.offset_angle, len(bl.nodes))
                out[idx] += T.T @ getattr(bl, attr)
            return out

        ix = np.ix_(free, free)
        mh = _harmonics(lambda a: scatter_mat(a, "mass"), 2)
        kh = _harmonics(lambda a: scatter_mat(a, "stiffness"), 2)
        mh[0] = mh[0] + m_fixed
        kh[0] = kh[0] + k_fixed
        self._mass_h = np.stack([h[ix] for h in mh])
        self._stiff_h = np.stack([h[ix] for h in kh])
        self._load_w2_h = np.stack([h[free] for h in _harmonics(lambda a: scatter_vec(a, "load_w2"), 1)])
        self._load_v_h = np.stack([h[free] for h in _harmonics(lambda a: scatter_vec(a, "load_v"), 1)])
        if opts.spin_stiffening:
            gh = _harmonics(lambda a: scatter_mat(a, "geometric"), 2)
            for bl in blades:
                gh[0][_NDOF * bl.nodes[0] + 3, _NDOF * bl.nodes[0] + 3] += bl.hub_moment
            self._geo_h = np.stack([h[ix] for h in gh])
        else:
            self._geo_h = None

        # generator of the shaft rotation about X: R(theta) = I + sin S + (1 - cos) S^2,
        # oriented so that the assembled matrices satisfy M(theta) = R M(0) R^T
        sy = np.zeros(n_full, dtype=int)
        sg = np.zeros(n_full)
        for node in range(n_nodes):
            for base in (_NDOF * node, _NDOF * node + 3):
                sy[base + 1], sg[base + 1] = base + 2, -1.0
                sy[base + 2], sg[base + 2] = base + 1, 1.0
        pos = np.full(n_full, -1)
        pos[free] = np.arange(free.size)
        self._gen_src = np.maximum(pos[sy[free]], 0)
        self._gen_sign = np.where(pos[sy[free]] >= 0, sg[free], 0.0)
        self._corot = None

    # ------------------------------------------------------------------
    @property
    def n_free(self) -> int:
        return self.dofmap.n_free

    def blade_tip_radius(self, stage: int, blade: int) -> float:
        return next(bl.tip_radius for bl in self._blades if (bl.stage, bl.index) == (stage, blade))

    def blade_length(self, stage: int, blade: int) -> float:
        return next(bl.length for bl in self._blades if (bl.stage, bl.index) == (stage, blade))

    def matrices(self, t: float):
        """Free-DOF mass and stiffness (spin stiffening included) at time ``t``."""
        b2 = _basis(self.rpm.angle(t), 2)
        k = np.tensordot(b2, self._stiff_h, 1)
        if self._geo_h is not None:
            k += self.rpm.omega(t) ** 2 * np.tensordot(b2, self._geo_h, 1)
        return np.tensordot(b2, self._mass_h, 1), k

    def mass_rate(self, t: float) -> np.ndarray:
        """Time derivative of the free-DOF mass matrix."""
        theta = self.rpm.angle(t)
        db = np.array([0.0, -math.sin(theta), math.cos(theta), -2.0 * math.sin(2 * theta), 2.0 * math.cos(2 * theta)])
        return self.rpm.omega(t) * np.tensordot(db, self._mass_h, 1)

    def force(self, t: float) -> np.ndarray:
        b1 = _basis(self.rpm.angle(t), 1)
        w = self.rpm.omega(t)
        return w * w * (b1 @ self._load_w2_h) + b1 @ self._load_v_h

    def system(self, t: float) -> SystemMatrices:
        m, k = self.matrices(t)
        c = self.a0 * m + self.a1 * k
        mdot = self.mass_rate(t) if self.options.mass_rate else None
        return SystemMatrices(m, c, k, self.force(t), t, self.a0, self.a1, mdot)

    def generator(self, x: np.ndarray) -> np.ndarray:
        """Apply S = R^T dR/dtheta, the skew generator of the shaft rotation."""
        sign = self._gen_sign if np.ndim(x) == 1 else self._gen_sign[:, None]
        return sign * x[self._gen_src]

    def to_fixed(self, t: float, q: np.ndarray) -> np.ndarray:
        """Global-frame vector ``R(theta) q`` of the co-rotating vector ``q``."""
        theta = self.rpm.angle(t)
        sq = self.generator(q)
        return q + math.sin(theta) * sq + (1.0 - math.cos(theta)) * self.generator(sq)

    def to_rotating(self, t: float, u: np.ndarray) -> np.ndarray:
        """Co-rotating vector ``R(theta)^T u``."""
        theta = self.rpm.angle(t)
        su = self.generator(u)
        return u - math.sin(theta) * su + (1.0 - math.cos(theta)) * self.generator(su)

    def _corotating_parts(self):
        if self._corot is None:
            b0 = _basis(0.0, 2)
            m0 = np.tensordot(b0, self._mass_h, 1)
            ke = np.tensordot(b0, self._stiff_h, 1)
            kg = np.zeros_like(ke) if self._geo_h is None else np.tensordot(b0, self._geo_h, 1)
            S = self.generator(np.eye(self.n_free))
            ms, ss = m0 @ S, S @ S
            mdot = (S @ m0 - ms) if self.options.mass_rate else np.zeros_like(m0)
            b1 = _basis(0.0, 1)
            self._corot = dict(m=m0, ke=ke, kg=kg, ms=ms, mss=m0 @ ss, kes=ke @ S, kgs=kg @ S,
                               mdot=mdot, mdots=mdot @ S,
                               f_w2=b1 @ self._load_w2_h, f_v=b1 @ self._load_v_h)
        return self._corot

    def corotating_system(self, t: float) -> SystemMatrices:
        """Equations of motion for ``q = R(theta)^T u``.

        Substituting ``u = R q`` and premultiplying by ``R^T`` removes the
        angle dependence: ``M0 q'' + G q' + Kq q = f0`` with ``G`` holding the
        Coriolis and damping terms and ``Kq`` the stiffness plus centrifugal
        softening and Euler terms. Every matrix is a fixed combination of the
        theta = 0 matrices, so at constant speed the system is time-invariant.
        """
        p = self._corotating_parts()
        w, dw = self.rpm.omega(t), self.rpm.omega_rate(t)
        k0 = p["ke"] + w * w * p["kg"]
        k0s = p["kes"] + w * w * p["kgs"]
        c0 = self.a0 * p["m"] + self.a1 * k0
        g = c0 + w * p["mdot"] + 2.0 * w * p["ms"]
        kq = k0 + dw * p["ms"] + w * w * p["mss"] + w * (self.a0 * p["ms"] + self.a1 * k0s + w * p["mdots"])
        f = w * w * p["f_w2"] + p["f_v"]
        return SystemMatrices(p["m"], g, kq, f, t, self.a0, self.a1, None, corotating=True)

    def direct_matrices(self, t: float):
        """Reference path: rotate and scatter every blade explicitly."""
        theta = self.rpm.angle(t)
        w2 = self.rpm.omega(t) ** 2 if self.options.spin_stiffening else 0.0
        m = self._m_fixed.copy()
        k = self._k_fixed.copy()
        for bl in self._blades:
            idx = np.ix_(*(2 * (_dof_indices(bl.nodes),)))
            T = _rotate_nodes(theta + bl.offset_angle, len(bl.nodes))
            m[idx] += T.T @ bl.mass @ T
            k[idx] += T.T @ (bl.stiffness + w2 * bl.geometric) @ T
            hub = _NDOF * bl.nodes[0] + 3
            k[hub, hub] += w2 * bl.hub_moment
        ix = np.ix_(self.dofmap.free, self.dofmap.free)
        return m[ix], k[ix]

    def total_mass(self) -> float:
        """Total translating mass of the unconstrained assembly (kg)."""
        r = np.zeros(self._n_full)
        r[0::_NDOF] = 1.0
        m = self._m_fixed.copy()
        for bl in self._blades:
            idx = _dof_indices(bl.nodes)
            T = _rotate_nodes(bl.offset_angle, len(bl.nodes))
            m[np.ix_(idx, idx)] += T.T @ bl.mass @ T
        return float(r @ m @ r)

    def tip_axial_index(self, stage: int, blade: int) -> int:
        """Free index of the global X translation at a blade tip."""
        return self.dofmap.index(f"stage{stage}.blade{blade}.tip.uX")

    def blade_local_state(self, stage: int, blade: int, t: float, u: np.ndarray) -> np.ndarray:
        """Blade nodal displacements in the blade frame, shape ``(nodes, 6)``."""
        nodes = self.dofmap.blade_nodes[(stage, blade)]
        bl = next(b for b in self._blades if (b.stage, b.index) == (stage, blade))
        R = rotation_block(self.rpm.angle(t) + bl.offset_angle)
        out = np.zeros((len(nodes), _NDOF))
        for k, node in enumerate(nodes):
            fi = self.dofmap.node_free_indices(node)
            g = np.where(fi >= 0, u[np.maximum(fi, 0)], 0.0)
            out[k, :3] = R @ g[:3]
            out[k, 3:] = R @ g[3:]
        return out


def _dof_indices(nodes) -> np.ndarray:
    return np.concatenate([np.arange(_NDOF * n, _NDOF * n + _NDOF) for n in nodes])


def assemble(scenario, t: float = 0.0, **kw):
    """Assemble a scenario's system at time ``t``; returns ``(SystemMatrices, DofMap)``."""
    model = RotorModel.from_scenario(scenario, **kw)
    return model.system(t), model.dofmap


def _member_system(blocks, n_nodes, fixed, t=0.0):
    n = _NDOF * n_nodes
    m = np.zeros((n, n))
    k = np.zeros((n, n))
    for node, em in blocks:
        sl = slice(_NDOF * node, _NDOF * node + 12)
        m[sl, sl] += em.mass
        k[sl, sl] += em.stiffness
    free = np.setdiff1d(np.arange(n), fixed)
    ix = np.ix_(free, free)
    return SystemMatrices(m[ix], np.zeros_like(m[ix]), k[ix], np.zeros(len(free)), t)


def blade_alone(blade: BladeGeometry, material: MaterialProperties, crack: CrackSpec | None = None,
                options: ModelOptions | None = None) -> SystemMatrices:
    """Non-rotating blade cantilevered at its root, in the blade frame."""
    opts = options or ModelOptions()
    sec = blade_section(blade)
    le = blade.length / blade.n_elements
    profile = None
    if crack is not None:
        if crack.location > blade.length:
            raise GeometryError("crack location beyond the blade length")
        profile = CrackProfile(cracked_blade_section(blade, crack.depth), crack.location, crack.gamma0,
                               opts.crack_length_scale or blade.width)
    blocks = [(e, blade_element(ElementContext(e + 1, le, sec, material, blade.length, profile),
                                opts.quadrature_order))
              for e in range(blade.n_elements)]
    return _member_system(blocks, blade.n_elements + 1, np.arange(_NDOF))


def shaft_alone(stages, material: MaterialProperties, options: ModelOptions | None = None) -> SystemMatrices:
    """Bare shaft of all stages, no disks or blades, with the configured root support."""
    opts = options or ModelOptions()
    blocks = []
    node = 0
    for st in stages:
        le = st.shaft.length / st.shaft.n_elements
        sec = shaft_section(st.shaft)
        for e in range(st.shaft.n_elements):
            blocks.append((node, shaft_element(ElementContext(e + 1, le, sec, material, st.shaft.length))))
            node += 1
    fixed = np.arange(_NDOF) if opts.boundary == "clamped" else np.arange(4)
    return _member_system(blocks, node + 1, fixed)


def boundary_description(options: ModelOptions) -> str:
    if options.boundary == "clamped":
        return "shaft root clamped (all six DOFs fixed)"
    return "shaft root pinned (translations and twist fixed)"

"""Two-node, 12-DOF Euler-Bernoulli beam elements for shaft and blades.

Local DOF order at each node is ``(uX, uY, uZ, thX, thY, thZ)``; the element
axis is local X. Section inertias are named by the deflection they resist:
bending along Y (``uY``, ``thZ``) uses ``i_y`` and bending along Z
(``uZ``, ``thY``) uses ``i_z``, with ``thY = -duZ/dx``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sections import GeometryError, MaterialProperties, SectionProperties, crack_scale

__all__ = [
    "DOF_LABELS",
    "ElementMatrices",
    "CrackProfile",
    "ElementContext",
    "gauss_integrate",
    "hermite",
    "hermite_d",
    "hermite_dd",
    "shaft_element",
    "blade_element",
    "geometric_stiffness",
]

DOF_LABELS = ("uX", "uY", "uZ", "thX", "thY", "thZ")

# (w1, rot1, w2, rot2) index sets of the two bending planes
_XY = np.array([1, 5, 7, 11])
_XZ = np.array([2, 4, 8, 10])
# thY = -dw/dx flips the sign of the rotational Hermite functions
_XZ_SIGN = np.array([1.0, -1.0, 1.0, -1.0])
_AXIAL = np.array([0, 6])
_TORSION = np.array([3, 9])

DEFAULT_ORDER = 16


@dataclass(frozen=True)
class ElementMatrices:
    mass: np.ndarray
    stiffness: np.ndarray
    dof_order: tuple = tuple(f"{d}{n}" for n in (1, 2) for d in DOF_LABELS)


@dataclass(frozen=True)
class CrackProfile:
    """Spanwise softening around a crack plane, in member coordinates."""

    cracked: SectionProperties
    location: float
    gamma0: float
    length_scale: float

    def scales(self, baseline: SectionProperties, x):
        """Multipliers ``(area, i_y, i_z, j_x)`` at member positions ``x``."""
        f = lambda b, c: crack_scale(b, c, self.gamma0, self.location, self.length_scale, x)
        return (
            f(baseline.area, self.cracked.area),
            f(baseline.i_y, self.cracked.i_y),
            f(baseline.i_z, self.cracked.i_z),
            f(baseline.j_x, self.cracked.j_x),
        )


@dataclass(frozen=True)
class ElementContext:
    """Element ``index`` (1-based) of a member, spanning ``[start, start + length]``."""

    index: int
    length: float
    section: SectionProperties
    material: MaterialProperties
    member_length: float | None = None
    crack: CrackProfile | None = None
    start: float | None = None

    def __post_init__(self):
        if self.length <= 0:
            raise GeometryError("element length must be positive")
        if self.index < 1:
            raise GeometryError("element index is 1-based")
        if self.member_length is not None and self.offset + self.length > self.member_length * (1 + 1e-9):
            raise GeometryError("element extends beyond its member")

    @property
    def offset(self) -> float:
        """Member coordinate of node 1."""
        if self.start is not None:
            return self.start
        return (self.index - 1) * self.length


def gauss_integrate(f: Callable, lower: float, upper: float, order: int = DEFAULT_ORDER):
    """Gauss-Legendre quadrature of a vectorised ``f`` over ``[lower, upper]``.

    Exact for polynomials up to degree ``2 * order - 1``. ``f`` may return
    arrays whose leading axis runs over the sample points.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    xi, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (upper - lower)
    x = lower + half * (xi + 1.0)
    vals = np.asarray(f(x), dtype=float)
    if vals.ndim == 0:
        vals = np.full(order, float(vals))
    return half * np.tensordot(w, vals, axes=(0, 0))


def hermite(x, length):
    """Cubic Hermite functions ``(H1, H2, H3, H4)`` on ``[0, length]``, shape (4, n)."""
    L = length
    s = np.asarray(x, dtype=float) / L
    return np.array([
        1 - 3 * s**2 + 2 * s**3,
        L * (s - 2 * s**2 + s**3),
        3 * s**2 - 2 * s**3,
        L * (s**3 - s**2),
    ])


def hermite_d(x, length):
    """First derivatives of :func:`hermite`."""
    L = length
    s = np.asarray(x, dtype=float) / L
    return np.array([
        (-6 * s + 6 * s**2) / L,
        1 - 4 * s + 3 * s**2,
        (6 * s - 6 * s**2) / L,
        3 * s**2 - 2 * s,
    ])


def hermite_dd(x, length):
    """Second derivatives of :func:`hermite`."""
    L = length
    s = np.asarray(x, dtype=float) / L
    one = np.ones_like(s)
    return np.array([
        (-6 + 12 * s) / L**2,
        (-4 + 6 * s) / L,
        (6 - 12 * s) / L**2,
        (6 * s - 2) / L,
    ]) * one


def _bending_stiffness(EI, L):
    return EI / L**3 * np.array([
        [12, 6 * L, -12, 6 * L],
        [6 * L, 4 * L**2, -6 * L, 2 * L**2],
        [-12, -6 * L, 12, -6 * L],
        [6 * L, 2 * L**2, -6 * L, 4 * L**2],
    ])


def _bending_mass(rhoA, L):
    return rhoA * L / 420.0 * np.array([
        [156, 22 * L, 54, -13 * L],
        [22 * L, 4 * L**2, 13 * L, -3 * L**2],
        [54, 13 * L, 156, -22 * L],
        [-13 * L, -3 * L**2, -22 * L, 4 * L**2],
    ])


def _bar(k):
    return k * np.array([[1.0, -1.0], [-1.0, 1.0]])


def _bar_mass(m):
    return m / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])


def _scatter(block, idx, out, sign=None):
    if sign is not None:
        block = block * np.outer(sign, sign)
    out[np.ix_(idx, idx)] += block


def _mass(section: SectionProperties, rho: float, L: float) -> np.ndarray:
    m = np.zeros((12, 12))
    rhoA = rho * section.area
    bm = _bending_mass(rhoA, L)
    _scatter(bm, _XY, m)
    _scatter(bm, _XZ, m, _XZ_SIGN)
    _scatter(_bar_mass(rhoA * L), _AXIAL, m)
    _scatter(_bar_mass(rho * section.j_x * L), _TORSION, m)
    return m


def _uniform_stiffness(section: SectionProperties, mat: MaterialProperties, L: float) -> np.ndarray:
    k = np.zeros((12, 12))
    E = mat.young_modulus
    _scatter(_bending_stiffness(E * section.i_y, L), _XY, k)
    _scatter(_bending_stiffness(E * section.i_z, L), _XZ, k, _XZ_SIGN)
    _scatter(_bar(E * section.area / L), _AXIAL, k)
    _scatter(_bar(mat.G * section.j_x / L), _TORSION, k)
    return k


def _split_points(ctx: ElementContext):
    """Sub-interval edges on [0, L]; the crack plane is a kink of the profile."""
    L = ctx.length
    pts = [0.0, L]
    xc = ctx.crack.location - ctx.offset
    if 0.0 < xc < L:
        pts.insert(1, xc)
    return pts


def _cracked_stiffness(ctx: ElementContext, order: int) -> np.ndarray:
    L, sec, mat, crack = ctx.length, ctx.section, ctx.material, ctx.crack
    E, G = mat.young_modulus, mat.G

    def integrand(x):
        s_a, s_iy, s_iz, s_j = crack.scales(sec, x + ctx.offset)
        B = hermite_dd(x, L)                       # (4, n)
        bb = np.einsum("in,jn->nij", B, B)         # (n, 4, 4)
        dN = np.array([-1.0, 1.0]) / L
        nn = np.outer(dN, dN)
        n = np.size(x)
        out = np.empty((n, 4, 4, 4))
        out[:, 0] = E * sec.i_y * s_iy[:, None, None] * bb
        out[:, 1] = E * sec.i_z * s_iz[:, None, None] * bb
        out[:, 2] = 0.0
        out[:, 3] = 0.0
        out[:, 2, :2, :2] = E * sec.area * s_a[:, None, None] * nn
        out[:, 3, :2, :2] = G * sec.j_x * s_j[:, None, None] * nn
        return out

    pts = _split_points(ctx)
    blocks = sum(gauss_integrate(integrand, a, b, order) for a, b in zip(pts[:-1], pts[1:]))
    k = np.zeros((12, 12))
    _scatter(blocks[0], _XY, k)
    _scatter(blocks[1], _XZ, k, _XZ_SIGN)
    _scatter(blocks[2][:2, :2], _AXIAL, k)
    _scatter(blocks[3][:2, :2], _TORSION, k)
    return k


def shaft_element(ctx: ElementContext, disk: tuple[float, float] | None = None) -> ElementMatrices:
    """Shaft element; an optional ``(mass, polar_inertia)`` disk is lumped at node 2."""
    if ctx.crack is not None:
        raise GeometryError("shaft elements do not carry cracks")
    m = _mass(ctx.section, ctx.material.density, ctx.length)
    k = _uniform_stiffness(ctx.section, ctx.material, ctx.length)
    if disk is not None:
        md, jd = disk
        m[[6, 7, 8], [6, 7, 8]] += md
        m[9, 9] += jd
    return ElementMatrices(m, k)


def blade_element(ctx: ElementContext, order: int = DEFAULT_ORDER) -> ElementMatrices:
    """Blade element; stiffness integrated over the crack profile when cracked.

    The crack softens stiffness only; the consistent mass is that of the
    intact section.
    """
    m = _mass(ctx.section, ctx.material.density, ctx.length)
    if ctx.crack is None:
        k = _uniform_stiffness(ctx.section, ctx.material, ctx.length)
    else:
        k = _cracked_stiffness(ctx, order)
    return ElementMatrices(m, k)


def geometric_stiffness(ctx: ElementContext, axial_force: Callable, order: int = 8) -> np.ndarray:
    """Stiffening of both bending planes by a tensile axial force.

    ``axial_force`` maps member coordinates to the tension N (N); the result
    is ``int N H' H'^T dx`` scattered onto the two bending planes.
    """
    L = ctx.length

    def integrand(x):
        d = hermite_d(x, L)
        n = np.asarray(axial_force(x + ctx.offset), dtype=float) * np.ones(np.size(x))
        return n[:, None, None] * np.einsum("in,jn->nij", d, d)

    g = gauss_integrate(integrand, 0.0, L, order)
    k = np.zeros((12, 12))
    _scatter(g, _XY, k)
    _scatter(g, _XZ, k, _XZ_SIGN)
    return k

"""Centrifugal and aerodynamic blade loads.

Distributed loads per unit span, in the blade frame (X' radial, Y' tangential,
Z' axial):

* centrifugal: ``rho_b A omega^2 r`` along X'
* drag/lift: ``0.5 rho_a (r^2 omega^2 + V^2) C S`` resolved through the
  downwash angle onto Y' and Z'

``r`` is the radius from the shaft axis; the blade root sits at ``d_disk / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elements import ElementContext, gauss_integrate, hermite
from .sections import BladeGeometry, GeometryError, MaterialProperties, blade_section

__all__ = [
    "AeroEnvironment",
    "ElementLoadVector",
    "total_blade_forces",
    "resolve_blade_forces",
    "consistent_nodal_loads",
    "centrifugal_tension",
]

_LOAD_ORDER = 4  # integrands are polynomials of degree <= 5


@dataclass(frozen=True)
class AeroEnvironment:
    air_density: float = 1.22
    freestream: float = 200.0
    c_lift: float = 0.02
    c_drag: float = 0.03
    chord: float | None = None  # defaults to the blade width

    def __post_init__(self):
        if self.air_density <= 0:
            raise GeometryError("air_density must be positive")
        if self.freestream < 0:
            raise GeometryError("freestream must be non-negative")
        if self.chord is not None and self.chord <= 0:
            raise GeometryError("chord must be positive")

    def chord_for(self, blade: BladeGeometry) -> float:
        return blade.width if self.chord is None else self.chord


@dataclass(frozen=True)
class ElementLoadVector:
    values: np.ndarray
    element_index: int


def total_blade_forces(blade: BladeGeometry, aero: AeroEnvironment, material: MaterialProperties,
                       disk_d: float, omega: float) -> tuple[float, float, float]:
    """Total centrifugal, lift and drag force on one blade, ``(F_C, F_L, F_D)``."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    r1 = disk_d / 2.0
    r2 = r1 + blade.length
    area = blade_section(blade).area
    f_c = material.density * area * omega**2 * (r2**2 - r1**2) / 2.0
    v2_int = omega**2 * (r2**3 - r1**3) / 3.0 + aero.freestream**2 * blade.length
    q = 0.5 * aero.air_density * aero.chord_for(blade) * v2_int
    return f_c, q * aero.c_lift, q * aero.c_drag


def resolve_blade_forces(f_c: float, f_l: float, f_d: float, downwash: float) -> tuple[float, float, float]:
    """Blade-frame components ``(F_X', F_Y', F_Z')`` of the total forces."""
    c, s = np.cos(downwash), np.sin(downwash)
    return f_c, -f_d * c - f_l * s, f_l * c - f_d * s


def _distributed(ctx: ElementContext, blade: BladeGeometry, aero: AeroEnvironment,
                 omega: float, disk_d: float, x):
    """Distributed loads ``(q_X', q_Y', q_Z')`` at element coordinates ``x``."""
    r = x + ctx.offset + disk_d / 2.0
    q_cf = ctx.material.density * ctx.section.area * omega**2 * r
    dyn = 0.5 * aero.air_density * ((r * omega) ** 2 + aero.freestream**2) * aero.chord_for(blade)
    q_l, q_d = dyn * aero.c_lift, dyn * aero.c_drag
    c, s = np.cos(blade.downwash_angle), np.sin(blade.downwash_angle)
    return q_cf, -q_d * c - q_l * s, q_l * c - q_d * s


def consistent_nodal_loads(ctx: ElementContext, blade: BladeGeometry, aero: AeroEnvironment,
                           omega: float, disk_d: float) -> ElementLoadVector:
    """Work-equivalent nodal forces and moments of one blade element (local frame)."""
    L = ctx.length

    def integrand(x):
        qx, qy, qz = _distributed(ctx, blade, aero, omega, disk_d, x)
        lin = np.array([1.0 - x / L, x / L])
        H = hermite(x, L)
        f = np.zeros((np.size(x), 12))
        f[:, 0], f[:, 6] = lin[0] * qx, lin[1] * qx
        f[:, 1], f[:, 5], f[:, 7], f[:, 11] = H[0] * qy, H[1] * qy, H[2] * qy, H[3] * qy
        # thY = -dw/dx: moments of the Z' load take the opposite sign
        f[:, 2], f[:, 4], f[:, 8], f[:, 10] = H[0] * qz, -H[1] * qz, H[2] * qz, -H[3] * qz
        return f

    return ElementLoadVector(gauss_integrate(integrand, 0.0, L, _LOAD_ORDER), ctx.index)


def centrifugal_tension(blade: BladeGeometry, material: MaterialProperties, disk_d: float,
                        omega: float, length: float | None = None, tip_mass: float = 0.0):
    """Axial tension ``N(x)`` of a spinning blade, ``x`` measured from the root.

    Carries the centrifugal pull of the span outboard of ``x`` plus a point
    mass at the tip. ``length`` defaults to the full blade length.
    """
    r1 = disk_d / 2.0
    r2 = r1 + (blade.length if length is None else length)
    rho_a = material.density * blade_section(blade).area

    def tension(x):
        r = r1 + np.asarray(x, dtype=float)
        return omega**2 * (rho_a * (r2**2 - r**2) / 2.0 + tip_mass * r2)

    return tension

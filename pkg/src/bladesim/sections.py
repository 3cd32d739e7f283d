"""Cross-section properties of the shaft, disk and trapezoidal blade.

Also holds the exponential crack profile used to soften blade rigidities
around a crack plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GeometryError",
    "ShaftGeometry",
    "DiskGeometry",
    "BladeGeometry",
    "MaterialProperties",
    "CrackSpec",
    "SectionProperties",
    "shaft_section",
    "disk_inertia",
    "blade_section",
    "cracked_blade_section",
    "crack_scale",
]


class GeometryError(ValueError):
    """Raised for inconsistent or non-physical geometry."""


@dataclass(frozen=True)
class ShaftGeometry:
    d_out: float
    d_in: float
    length: float
    n_elements: int = 1

    def __post_init__(self):
        if not self.d_out > self.d_in >= 0:
            raise GeometryError(
                f"shaft needs d_out > d_in >= 0 (got d_out={self.d_out}, d_in={self.d_in})"
            )
        if self.length <= 0:
            raise GeometryError("shaft length must be positive")
        if self.n_elements < 1:
            raise GeometryError("shaft needs at least one element")


@dataclass(frozen=True)
class DiskGeometry:
    d_disk: float
    thickness: float
    density: float

    def __post_init__(self):
        if self.thickness <= 0 or self.density <= 0:
            raise GeometryError("disk thickness and density must be positive")


@dataclass(frozen=True)
class BladeGeometry:
    width: float
    t1: float
    t2: float
    length: float
    n_elements: int = 2
    count: int = 8
    downwash_angle: float = 0.3

    def __post_init__(self):
        if not (self.t1 >= self.t2 > 0):
            raise GeometryError(f"blade needs t1 >= t2 > 0 (got t1={self.t1}, t2={self.t2})")
        if self.width <= 0 or self.length <= 0:
            raise GeometryError("blade width and length must be positive")
        if self.n_elements < 1 or self.count < 1:
            raise GeometryError("blade needs at least one element and one blade per stage")


@dataclass(frozen=True)
class MaterialProperties:
    young_modulus: float = 2.0e11
    poisson: float = 0.31
    density: float = 7833.0
    shear_modulus: float | None = None

    def __post_init__(self):
        if self.young_modulus <= 0 or self.density <= 0:
            raise GeometryError("young_modulus and density must be positive")
        if not 0 < self.poisson < 0.5:
            raise GeometryError("poisson must lie in (0, 0.5)")
        if self.shear_modulus is not None and self.shear_modulus <= 0:
            raise GeometryError("shear_modulus must be positive")

    @property
    def G(self) -> float:
        """Shear modulus; derived from E and nu when not given explicitly."""
        if self.shear_modulus is not None:
            return self.shear_modulus
        return self.young_modulus / (2.0 * (1.0 + self.poisson))


@dataclass(frozen=True)
class CrackSpec:
    """Open edge crack of chordwise ``depth`` at ``location`` metres from the blade root."""

    stage: int
    blade: int
    depth: float
    location: float
    gamma0: float = 0.667

    def __post_init__(self):
        if self.depth < 0:
            raise GeometryError("crack depth must be non-negative")
        if self.location < 0:
            raise GeometryError("crack location must be non-negative")
        if self.gamma0 <= 0:
            raise GeometryError("gamma0 must be positive")


@dataclass(frozen=True)
class SectionProperties:
    area: float
    i_y: float
    i_z: float
    j_x: float

    def scaled(self, area=1.0, i_y=1.0, i_z=1.0, j_x=1.0) -> "SectionProperties":
        return SectionProperties(self.area * area, self.i_y * i_y, self.i_z * i_z, self.j_x * j_x)


def shaft_section(geom: ShaftGeometry) -> SectionProperties:
    """Hollow circular shaft: area, bending inertias and polar inertia."""
    do, di = geom.d_out, geom.d_in
    if di >= do:
        raise GeometryError("shaft inner diameter must be smaller than the outer diameter")
    area = math.pi * (do**2 - di**2) / 4.0
    i = math.pi * (do**4 - di**4) / 64.0
    return SectionProperties(area=area, i_y=i, i_z=i, j_x=2.0 * i)


def disk_inertia(geom: DiskGeometry, host: ShaftGeometry, mass_form: bool = True) -> tuple[float, float]:
    """Lumped disk mass and polar inertia about the shaft axis.

    The disk is an annulus of outer diameter ``d_disk`` mounted on the shaft
    outer diameter. With ``mass_form`` the polar term is a mass moment of
    inertia (kg m^2); otherwise the bare polar area moment of the annulus is
    returned, which is what the original lumped-disk formula literally reads.
    """
    if geom.d_disk < host.d_out:
        raise GeometryError("disk diameter must exceed the shaft outer diameter")
    dd, do = geom.d_disk, host.d_out
    mass = geom.density * geom.thickness * math.pi * (dd**2 - do**2) / 4.0
    polar_area = math.pi * (dd**4 - do**4) / 32.0
    if mass_form:
        return mass, geom.density * geom.thickness * polar_area
    return mass, polar_area


def _trapezoid(width: float, t1: float, t2: float) -> SectionProperties:
    area = 0.5 * (t1 + t2) * width
    i_y = (t1**2 + 4.0 * t1 * t2 + t2**2) * width**3 / (36.0 * (t1 + t2))
    i_z = width * (t1 + t2) * (t1**2 + t2**2) / 48.0
    return SectionProperties(area=area, i_y=i_y, i_z=i_z, j_x=i_y + i_z)


def blade_section(geom: BladeGeometry) -> SectionProperties:
    """Trapezoidal blade section.

    ``t1`` and ``t2`` are the parallel sides (thickness at either edge) and
    ``width`` is the chord-wise distance between them. ``i_y`` resists
    bending along the chord (blade Y', tangential) and ``i_z`` bending
    through the thickness (blade Z', along the shaft axis).
    """
    return _trapezoid(geom.width, geom.t1, geom.t2)


def cracked_blade_section(geom: BladeGeometry, depth: float) -> SectionProperties:
    """Section at the crack plane: chord reduced by the crack depth.

    Area and flapwise inertia shrink linearly with the remaining chord, the
    chordwise inertia with its cube, and the torsion constant is the sum of
    the two cracked bending inertias.
    """
    if not 0 <= depth < geom.width:
        raise GeometryError(
            f"crack depth {depth} must lie in [0, blade width {geom.width}); "
            "a crack through the full chord is a blade-off event"
        )
    return _trapezoid(geom.width - depth, geom.t1, geom.t2)


def crack_scale(baseline, cracked, gamma0, location, length_scale, x):
    """Spanwise rigidity multiplier around a crack.

    Returns ``1 / (1 + C exp(-2 gamma0 |x - location| / length_scale))`` with
    ``C = (baseline - cracked) / cracked``. Multiply EI, EA or GJ by the result.
    ``x`` may be a scalar or an array of span positions from the blade root.
    """
    if cracked <= 0:
        raise GeometryError("cracked section property must be positive; model a severed section as blade-off")
    if cracked > baseline:
        raise GeometryError("cracked section property cannot exceed the baseline")
    if length_scale <= 0:
        raise GeometryError("crack length scale must be positive")
    c = (baseline - cracked) / cracked
    x = np.asarray(x, dtype=float)
    s = 1.0 / (1.0 + c * np.exp(-2.0 * gamma0 * np.abs(x - location) / length_scale))
    return float(s) if s.ndim == 0 else s

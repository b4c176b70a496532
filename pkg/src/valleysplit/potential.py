"""Piecewise description of the total potential V(z) = V_c(z) + eF*(z - z0).

The confinement part is piecewise constant; the field enters as a linear term
over the whole domain.  Interface steps are kept as explicit signed jumps so
the distributional derivative dV/dz = slope + sum_i dV_i * delta(z - z_i) is
available without any numerical differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .materials import UNITS, MaterialSystem


@dataclass(frozen=True)
class WellGeometry:
    """Symmetric well of width `well_nm` with barriers of `barrier_nm` each side."""

    well_nm: float
    barrier_nm: float
    center_nm: float = 0.0

    def __post_init__(self) -> None:
        if self.well_nm <= 0:
            raise ValueError("well width must be positive")
        if self.barrier_nm <= 0:
            raise ValueError("barrier width must be positive")

    @property
    def z_left(self) -> float:
        return self.center_nm - 0.5 * self.well_nm

    @property
    def z_right(self) -> float:
        return self.center_nm + 0.5 * self.well_nm

    @property
    def z_min(self) -> float:
        return self.z_left - self.barrier_nm

    @property
    def z_max(self) -> float:
        return self.z_right + self.barrier_nm


@dataclass(frozen=True)
class PotentialProfile:
    """Piecewise-constant confinement plus a global linear slope.

    V(z) = segment_values[i] + slope * (z - slope_origin) for
    breakpoints[i] <= z < breakpoints[i+1].  At a breakpoint the right limit
    is returned (the convention never affects per-element integrals).  The
    jump list is derived from the segment table, so it is invariant under any
    mesh refinement by construction.
    """

    breakpoints: tuple
    segment_values: tuple
    slope_ev_per_nm: float = 0.0
    slope_origin_nm: float = 0.0

    def __post_init__(self) -> None:
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing, >= 2 entries")
        if len(self.segment_values) != bp.size - 1:
            raise ValueError("need one segment value per interval")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))
        object.__setattr__(self, "segment_values",
                           tuple(float(v) for v in self.segment_values))

    @property
    def z_min(self) -> float:
        return self.breakpoints[0]

    @property
    def z_max(self) -> float:
        return self.breakpoints[-1]

    @property
    def jumps(self) -> tuple:
        """Signed confinement steps ((z_i, V(z_i+) - V(z_i-)), ...)."""
        out = []
        for i in range(1, len(self.breakpoints) - 1):
            dv = self.segment_values[i] - self.segment_values[i - 1]
            if dv != 0.0:
                out.append((self.breakpoints[i], dv))
        return tuple(out)

    def _segment_index(self, z: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breakpoints, z, side="right") - 1
        # the right domain edge belongs to the last segment
        return np.clip(idx, 0, len(self.segment_values) - 1)

    def value(self, z):
        """Total potential at z (eV); rejects out-of-domain points."""
        zz = np.asarray(z, dtype=float)
        if np.any(zz < self.z_min - 1e-12) or np.any(zz > self.z_max + 1e-12):
            raise ValueError("z outside the potential domain")
        seg = np.take(self.segment_values, self._segment_index(zz))
        out = seg + self.slope_ev_per_nm * (zz - self.slope_origin_nm)
        return float(out) if np.isscalar(z) else out

    def segment_values_at(self, z) -> np.ndarray:
        """Confinement value of the segment containing each z (no slope)."""
        zz = np.asarray(z, dtype=float)
        return np.take(self.segment_values, self._segment_index(zz))

    def derivative_parts(self):
        """Distributional derivative: (smooth slope eV/nm, signed jump list)."""
        return self.slope_ev_per_nm, self.jumps

    def shifted(self, dv_ev: float) -> "PotentialProfile":
        """Same profile with a constant energy offset (gauge shift)."""
        return PotentialProfile(self.breakpoints,
                                tuple(v + dv_ev for v in self.segment_values),
                                self.slope_ev_per_nm, self.slope_origin_nm)

    def translated(self, dz_nm: float) -> "PotentialProfile":
        """The same physical potential translated by dz: V'(z) = V(z - dz)."""
        return PotentialProfile(tuple(b + dz_nm for b in self.breakpoints),
                                self.segment_values, self.slope_ev_per_nm,
                                self.slope_origin_nm + dz_nm)


def build_profile(geometry: WellGeometry, material: MaterialSystem,
                  field_v_per_m: float = 0.0) -> PotentialProfile:
    """Total potential of the well: dEc on the barriers, 0 on the well floor,
    plus the field slope e*F over the whole domain.

    A positive field tilts the potential up toward +z, pushing the electron
    toward the left interface.
    """
    if not np.isfinite(field_v_per_m):
        raise ValueError("field must be finite")
    dec = material.delta_ec_ev
    return PotentialProfile(
        breakpoints=(geometry.z_min, geometry.z_left, geometry.z_right, geometry.z_max),
        segment_values=(dec, 0.0, dec),
        slope_ev_per_nm=UNITS.field_to_slope(field_v_per_m),
        slope_origin_nm=0.0,
    )

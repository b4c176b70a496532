"""Physical constants, the internal unit system, and material parameter sets.

Everything downstream works in eV and nm so that matrix entries for nm-scale
wells stay near unity; inputs in SI units are converted once at the boundary
(1e7 V/m = 0.01 eV/nm per elementary charge).  The band parameters entering
the valley-pair coupling are kept in rydberg atomic units, which is the one
place bohr/rydberg conversions are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

# CODATA 2018 (SI)
HBAR_JS = 1.054_571_817e-34     # J s
M0_KG = 9.109_383_7015e-31      # kg
E_CHARGE_C = 1.602_176_634e-19  # C

RYDBERG_EV = 13.605_693_122_994
BOHR_NM = 0.052_917_721_0903

# hbar^2/(2 m0) in eV nm^2: the kinetic prefactor of the effective-mass
# Hamiltonian once masses are expressed in units of m0 (~0.0381 eV nm^2).
KINETIC_EV_NM2 = HBAR_JS**2 / (2.0 * M0_KG) / E_CHARGE_C * 1e18


@dataclass(frozen=True)
class UnitSystem:
    """Internal units (eV, nm) plus the conversion factors into them."""

    energy_unit: str = "eV"
    length_unit: str = "nm"
    kinetic_ev_nm2: float = KINETIC_EV_NM2
    slope_per_field: float = 1e-9   # (eV/nm) per (V/m), per elementary charge
    ev_per_rydberg: float = RYDBERG_EV
    nm_per_bohr: float = BOHR_NM

    def field_to_slope(self, field_v_per_m: float) -> float:
        """Electric field in V/m -> potential-energy slope e*F in eV/nm."""
        return field_v_per_m * self.slope_per_field

    def slope_to_field(self, slope_ev_per_nm: float) -> float:
        return slope_ev_per_nm / self.slope_per_field

    def rydberg_to_ev(self, e_ry: float) -> float:
        return e_ry * self.ev_per_rydberg

    def ev_to_rydberg(self, e_ev: float) -> float:
        return e_ev / self.ev_per_rydberg

    def bohr_to_nm(self, x_bohr: float) -> float:
        return x_bohr * self.nm_per_bohr

    def nm_to_bohr(self, x_nm: float) -> float:
        return x_nm / self.nm_per_bohr

    def wavevector_au_to_inv_nm(self, k_inv_bohr: float) -> float:
        return k_inv_bohr / self.nm_per_bohr

    def wavevector_inv_nm_to_au(self, k_inv_nm: float) -> float:
        return k_inv_nm * self.nm_per_bohr


UNITS = UnitSystem()


@dataclass(frozen=True)
class MaterialSystem:
    """Well/barrier parameter set for a symmetric Si quantum well.

    Masses are in units of m0.  The z valleys quantize with the longitudinal
    Si mass (0.916 m0); the barrier mass defaults to the well mass but is an
    independent knob because the weak form supports position-dependent mass
    at no extra cost.  `t_ry_bohr` and `eps_g_ry` are the band parameters of
    the valley-mixing angle; `alpha`/`beta` are the constants of the
    plane-wave-overlap ansatz (stored for reference, not used numerically).
    """

    name: str
    m_z_well: float
    m_z_barrier: float
    delta_ec_ev: float        # conduction-band discontinuity
    lattice_nm: float = 0.5431
    k0_fraction: float = 0.85  # valley minimum at k0_fraction * 2*pi/a
    t_ry_bohr: float = 1.08
    eps_g_ry: float = 0.268
    alpha: float = 0.6086
    beta: float = 0.3915

    def __post_init__(self) -> None:
        if self.m_z_well <= 0 or self.m_z_barrier <= 0:
            raise ValueError("effective masses must be positive")
        if self.delta_ec_ev < 0:
            raise ValueError("band discontinuity must be nonnegative")
        if self.lattice_nm <= 0 or not 0 < self.k0_fraction <= 1:
            raise ValueError("invalid lattice constant or valley position")

    @property
    def k0_inv_nm(self) -> float:
        """Valley-minimum wavevector along z, nm^-1."""
        return self.k0_fraction * 2.0 * math.pi / self.lattice_nm

    @property
    def k0_inv_bohr(self) -> float:
        return UNITS.wavevector_inv_nm_to_au(self.k0_inv_nm)

    def with_overrides(self, **kwargs) -> "MaterialSystem":
        return replace(self, **kwargs)


SIO2_SI = MaterialSystem("sio2_si", m_z_well=0.916, m_z_barrier=0.916, delta_ec_ev=3.1)
SIGE30_SI = MaterialSystem("sige30_si", m_z_well=0.916, m_z_barrier=0.916, delta_ec_ev=0.16)

PRESETS = {m.name: m for m in (SIO2_SI, SIGE30_SI)}

# JSON config keys accepted under "material" (besides "preset").
_MATERIAL_KEYS = {
    "m_z_well": "m_z_well",
    "m_z_barrier": "m_z_barrier",
    "delta_Ec_eV": "delta_ec_ev",
    "lattice_nm": "lattice_nm",
    "k0_fraction": "k0_fraction",
}


def material_from_config(cfg: dict) -> MaterialSystem:
    """Build a MaterialSystem from the {"material": {...}} config fragment."""
    preset = cfg.get("preset", "sio2_si")
    if preset not in PRESETS:
        raise ValueError(f"unknown material preset {preset!r}; "
                         f"choose from {sorted(PRESETS)}")
    overrides = {}
    for key, attr in _MATERIAL_KEYS.items():
        if key in cfg:
            overrides[attr] = float(cfg[key])
    unknown = set(cfg) - set(_MATERIAL_KEYS) - {"preset"}
    if unknown:
        raise ValueError(f"unknown material config keys: {sorted(unknown)}")
    return PRESETS[preset].with_overrides(**overrides)


def mixing_angle(k_inv_bohr: float, material: MaterialSystem) -> float:
    """Band-mixing angle lambda(K): tan(2*lambda) = 2*T*K/eps_G.

    K is a wavevector in atomic units (bohr^-1).  Odd in K; 2*lambda lies in
    [0, pi/2) for K >= 0 and approaches pi/2 as K -> infinity.
    """
    return 0.5 * math.atan(2.0 * material.t_ry_bohr * k_inv_bohr / material.eps_g_ry)


_AXES = {
    (1, 0, 0), (-1, 0, 0),
    (0, 1, 0), (0, -1, 0),
    (0, 0, 1), (0, 0, -1),
}


def _as_axis(v) -> tuple:
    t = tuple(v)
    if len(t) != 3 or any(x != int(x) for x in t):
        raise ValueError(f"not a Cartesian axis unit vector: {v!r}")
    t = tuple(int(x) for x in t)
    if t not in _AXES:
        raise ValueError(f"not a Cartesian axis unit vector: {v!r}")
    return t


def coupling_weight(e1, e2, k_inv_bohr: float, material: MaterialSystem) -> float:
    """Intervalley plane-wave overlap weight between two valley axes.

    e1, e2 must be +-x/y/z unit vectors.  Equals 1 for identical axes
    (independent of K) and -cos(2*lambda_K) for opposite axes.
    """
    a, b = _as_axis(e1), _as_axis(e2)
    dot = sum(x * y for x, y in zip(a, b))
    lam = mixing_angle(k_inv_bohr, material)
    return 0.5 * (1 + dot) - 0.5 * (1 - dot) * math.cos(2.0 * lam)


# Published coupling constants for the z-valley pair.
CANONICAL_I56 = -0.217
CANONICAL_CJ = 0.414
CANONICAL_PV = 1.045


@dataclass(frozen=True)
class ValleyPairConstants:
    """Coupling constants of the z-valley pair splitting integral.

    `i56` is the dimensionless plane-wave overlap for opposite z valleys,
    `c_j` the gradient-coupling coefficient (the gradient prefactor is
    p_d = c_j/K0, a length), `p_v` the potential prefactor, and `k0_inv_nm`
    the valley-minimum wavevector used in the oscillatory phase.
    """

    i56: float
    c_j: float
    p_v: float
    k0_inv_nm: float
    mode: str

    def __post_init__(self) -> None:
        if self.k0_inv_nm <= 0:
            raise ValueError("K0 must be positive")

    @property
    def p_d_nm(self) -> float:
        """Gradient-channel prefactor c_j/K0, in nm."""
        return self.c_j / self.k0_inv_nm


def valley_pair_constants(material: MaterialSystem,
                          mode: str = "canonical") -> ValleyPairConstants:
    """Constants for the z-valley pair, canonical or recomputed.

    "canonical" returns the published tuple (i56, c_j, p_v) =
    (-0.217, 0.414, 1.045) with p_d = 0.414/K0 derived from the material's
    lattice constant.  "analytic" recomputes i56 = -cos(2*lambda) and
    c_j = sin^2(2*lambda)*cos(2*lambda) from the mixing angle at K0; the
    potential prefactor has no analytic counterpart and stays at 1.045.
    """
    k0_nm = material.k0_inv_nm
    if mode == "canonical":
        return ValleyPairConstants(CANONICAL_I56, CANONICAL_CJ, CANONICAL_PV,
                                   k0_nm, mode)
    if mode == "analytic":
        lam2 = 2.0 * mixing_angle(material.k0_inv_bohr, material)
        c, s = math.cos(lam2), math.sin(lam2)
        return ValleyPairConstants(-c, s * s * c, CANONICAL_PV, k0_nm, mode)
    raise ValueError(f"unknown constants mode {mode!r}; "
                     "choose 'canonical' or 'analytic'")

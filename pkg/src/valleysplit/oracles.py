"""Self-check battery: closed-form oracles and invariant suites.

Every check compares an artifact computation against an independent route
(closed-form eigenvalues, brute-force quadrature, exact algebraic identities)
and reports measured vs expected.  The CLI `oracles` subcommand prints one
line per check and exits nonzero on any failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import coupling, fem, potential
from .materials import (CANONICAL_CJ, CANONICAL_I56, CANONICAL_PV,
                        KINETIC_EV_NM2, SIO2_SI, UNITS, ValleyPairConstants,
                        mixing_angle, valley_pair_constants)
from .sweeps import SweepConfig


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass(frozen=True)
class OracleReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        n_fail = sum(not c.passed for c in self.checks)
        out.append(f"{len(self.checks) - n_fail}/{len(self.checks)} checks passed")
        return out


def default_config() -> SweepConfig:
    return SweepConfig(material=SIO2_SI, widths_nm=(6.0,), fields_v_per_m=(1e7,))


def hard_wall_energy(n: int, width_nm: float, mass: float) -> float:
    """Closed-form infinite-well level (eV), n = 1, 2, ..."""
    return KINETIC_EV_NM2 / mass * (n * math.pi / width_nm) ** 2


def solve_hard_wall(width_nm: float, mass: float, target_h: float,
                    n_states: int = 1):
    """Dirichlet box with a flat zero potential (the eigenvalue oracle setup)."""
    mesh = fem.uniform_mesh(-0.5 * width_nm, 0.5 * width_nm, target_h)
    profile = potential.PotentialProfile(
        breakpoints=(-0.5 * width_nm, 0.5 * width_nm), segment_values=(0.0,))
    material = SIO2_SI.with_overrides(m_z_well=mass, m_z_barrier=mass,
                                      delta_ec_ev=0.0)
    return fem.solve(fem.assemble(mesh, profile, material), n_states), profile


def brute_force_overlap(solution: fem.EigenSolution, n: int,
                        profile: potential.PotentialProfile,
                        constants: ValleyPairConstants,
                        fine_nm: float = 0.001,
                        richardson: bool = True) -> complex:
    """Trapezoid quadrature of the smooth splitting integrand, per element.

    Sub-spacing <= fine_nm inside every element, so all kinks of the
    piecewise integrand sit exactly on quadrature points.  With `richardson`
    the fine_nm and 2*fine_nm rules are extrapolated, removing the O(h^2)
    trapezoid bias (the plain rule is biased at the 1e-5..1e-4 relative level
    by the interface kinks, far above the closed form's accuracy).
    """
    def trapz(spacing: float) -> complex:
        total = 0.0 + 0.0j
        nodes = solution.mesh.nodes
        k0 = constants.k0_inv_nm
        s = profile.slope_ev_per_nm
        for i in range(nodes.size - 1):
            za, zb = nodes[i], nodes[i + 1]
            m = max(1, int(np.ceil((zb - za) / spacing - 1e-12)))
            zf = np.linspace(za, zb, m + 1)
            rho = solution.psi(n, zf) ** 2
            g = constants.p_v * profile.value(zf) + constants.p_d_nm * s
            total += np.trapezoid(np.exp(-2j * k0 * zf) * rho * g, zf)
        return total

    if not richardson:
        return trapz(fine_nm)
    t_fine = trapz(fine_nm)
    t_coarse = trapz(2.0 * fine_nm)
    return t_fine + (t_fine - t_coarse) / 3.0


def _exact_norm(solution: fem.EigenSolution, n: int) -> float:
    """Exact integral of the piecewise-quadratic |psi_n|^2."""
    c = solution.coefficients[n]
    h = solution.mesh.element_lengths
    pa, pb = c[:-1], c[1:]
    return float(np.sum(h / 3.0 * (pa * pa + pa * pb + pb * pb)))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# --- individual checks -----------------------------------------------------

def _check_kinetic_prefactor() -> CheckResult:
    dev = abs(0.0381 - KINETIC_EV_NM2) / KINETIC_EV_NM2
    return CheckResult(
        "kinetic prefactor", dev < 5e-3,
        f"hbar^2/2m0 = {KINETIC_EV_NM2:.6f} eV nm^2, 0.0381 is {dev:.2e} off "
        "(tol 0.5%)")


def _check_unit_round_trips() -> CheckResult:
    vals = (1.0, 0.2680, 5431.0, 7.7e-3)
    worst = 0.0
    for x in vals:
        for to, back in ((UNITS.field_to_slope, UNITS.slope_to_field),
                         (UNITS.rydberg_to_ev, UNITS.ev_to_rydberg),
                         (UNITS.bohr_to_nm, UNITS.nm_to_bohr),
                         (UNITS.wavevector_au_to_inv_nm,
                          UNITS.wavevector_inv_nm_to_au)):
            worst = max(worst, _rel(back(to(x)), x))
    return CheckResult("unit round trips", worst < 1e-12,
                       f"worst relative round-trip error {worst:.2e} (tol 1e-12)")


def _check_constants(config: SweepConfig) -> list[CheckResult]:
    mat = config.material
    canon = valley_pair_constants(mat, "canonical")
    exact = (canon.i56 == CANONICAL_I56 and canon.c_j == CANONICAL_CJ
             and canon.p_v == CANONICAL_PV)
    p_d_m = canon.p_d_nm * 1e-9
    in_window = abs(p_d_m - 4.42e-11) / 4.42e-11 < 0.06 and p_d_m < 7.2e-11
    out = [
        CheckResult(
            "canonical constants", exact,
            f"(i56, c_j, p_v) = ({canon.i56}, {canon.c_j}, {canon.p_v}), "
            "expected (-0.217, 0.414, 1.045) exactly"),
        CheckResult(
            "gradient prefactor magnitude", in_window,
            f"c_j/K0 = {p_d_m:.3e} m from a = {mat.lattice_nm} nm; quoted "
            f"4.42e-11 (within 6%: {abs(p_d_m - 4.42e-11) / 4.42e-11:.1%}), "
            "phenomenological 7.2e-11 is an upper bound"),
    ]
    ana = valley_pair_constants(mat, "analytic")
    lam2 = 2.0 * mixing_angle(mat.k0_inv_bohr, mat)
    consistent = (abs(ana.i56 + math.cos(lam2)) < 1e-15
                  and abs(ana.c_j - math.sin(lam2) ** 2 * math.cos(lam2)) < 1e-15)
    out.append(CheckResult(
        "analytic constants self-consistency", consistent,
        f"analytic vs canonical: |i56| {abs(ana.i56):.4f} vs 0.217, "
        f"c_j {ana.c_j:.4f} vs 0.414 (documented discrepancies; "
        f"mode in use: {config.constants_mode})"))
    return out


def _check_hard_wall(config: SweepConfig) -> list[CheckResult]:
    mass, width = 0.916, 6.0
    sol, _ = solve_hard_wall(width, mass, config.mesh_h_nm, n_states=4)
    e1_exact = hard_wall_energy(1, width, mass)
    dev1 = _rel(sol.energies[0], e1_exact)
    ratio_dev = max(_rel(sol.energies[i] / sol.energies[0], (i + 1) ** 2)
                    for i in range(1, 4))
    return [
        CheckResult(
            "hard-wall ground state", dev1 < 5e-3,
            f"E1 = {1e3 * sol.energies[0]:.4f} meV vs closed form "
            f"{1e3 * e1_exact:.4f} meV ({dev1:.2e} rel, tol 0.5%) at "
            f"h = {config.mesh_h_nm} nm"),
        CheckResult(
            "hard-wall level ratios", ratio_dev < 5e-3,
            f"worst |E_n/E_1 - n^2| relative deviation {ratio_dev:.2e} "
            "for n <= 4 (tol 0.5%)"),
    ]


def _check_convergence() -> CheckResult:
    mass, width = 0.916, 6.0
    study = fem.convergence_study(
        lambda h: solve_hard_wall(width, mass, h)[0].energies[0],
        (0.2, 0.1, 0.05))
    ok = 1.8 <= study.observed_order <= 2.2
    return CheckResult(
        "convergence order", ok,
        f"observed order {study.observed_order:.3f} (expect [1.8, 2.2]), "
        f"extrapolated E1 = {1e3 * study.extrapolated:.4f} meV")


def _quadrature_cases() -> list[tuple[float, float, int]]:
    widths = (3.0, 4.0, 6.0, 8.0, 10.0)
    fields = (0.0, 2e7, 8e7, 1.5e8)
    cases = []
    for i, w in enumerate(widths):
        for j, f in enumerate(fields):
            cases.append((w, f, (i + j) % 2))
    return cases  # 20 cases over (W, F, n)


def _check_quadrature(config: SweepConfig) -> CheckResult:
    constants = valley_pair_constants(config.material, "canonical")
    worst = 0.0
    worst_case = None
    for w, f, n in _quadrature_cases():
        geometry = potential.WellGeometry(w, config.barrier_nm)
        solution, profile = fem.solve_well(geometry, config.material, f,
                                           target_h=0.05, n_states=n + 1)
        closed = coupling.oscillatory_overlap(solution, n, profile, constants)
        brute = brute_force_overlap(solution, n, profile, constants)
        dev = abs(closed - brute) / max(abs(brute), 1e-9)
        if dev > worst:
            worst, worst_case = dev, (w, f, n)
    return CheckResult(
        "oscillatory quadrature vs brute force", worst < 1e-6,
        f"worst of 20 cases {worst:.2e} relative at (W, F, n) = {worst_case} "
        "(tol 1e-6, extrapolated 0.001 nm trapezoid oracle)")


def _check_gauge_shift(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    mesh = fem.build_mesh(geometry, config.mesh_h_nm)
    profile = potential.build_profile(geometry, config.material, 1e7)
    base = fem.solve(fem.assemble(mesh, profile, config.material), 3)
    shifted = fem.solve(fem.assemble(mesh, profile.shifted(0.5),
                                     config.material), 3)
    e_dev = max(_rel(b + 0.5, s) for b, s in zip(base.energies,
                                                 shifted.energies))
    psi_dev = max(float(np.max(np.abs(np.abs(b) - np.abs(s))))
                  for b, s in zip(base.coefficients, shifted.coefficients))
    ok = e_dev < 1e-12 and psi_dev < 1e-8
    return CheckResult(
        "gauge shift", ok,
        f"+0.5 eV offset: worst energy deviation {e_dev:.2e} (tol 1e-12), "
        f"wavefunction change {psi_dev:.2e} (tol 1e-8)")


def _check_mirror(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    constants = valley_pair_constants(config.material, config.constants_mode)
    sol_p, prof_p = fem.solve_well(geometry, config.material, 5e7,
                                   config.mesh_h_nm)
    sol_m, prof_m = fem.solve_well(geometry, config.material, -5e7,
                                   config.mesh_h_nm)
    e_dev = _rel(sol_p.energies[0], sol_m.energies[0])
    d_p = coupling.valley_splitting(sol_p, 0, prof_p, constants).delta_ev
    d_m = coupling.valley_splitting(sol_m, 0, prof_m, constants).delta_ev
    d_dev = _rel(d_p, d_m)
    sol0, _ = fem.solve_well(geometry, config.material, 0.0, config.mesh_h_nm)
    c = sol0.coefficients[0]
    sym_dev = float(np.max(np.abs(np.abs(c) - np.abs(c[::-1]))))
    ok = e_dev < 1e-12 and d_dev < 1e-8 and sym_dev < 1e-8
    return CheckResult(
        "mirror symmetry", ok,
        f"field reversal: energy dev {e_dev:.2e}, splitting dev {d_dev:.2e}; "
        f"F=0 parity defect {sym_dev:.2e} (tols 1e-12/1e-8/1e-8)")


def _check_normalization(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    solution, _ = fem.solve_well(geometry, config.material, 1e7,
                                 config.mesh_h_nm, n_states=3)
    worst = max(abs(_exact_norm(solution, n) - 1.0)
                for n in range(solution.n_states))
    return CheckResult(
        "normalization", worst < 1e-10,
        f"worst |int psi^2 - 1| = {worst:.2e} (tol 1e-10)")


def _check_m_orthogonality(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    profile = potential.build_profile(geometry, config.material, 1e7)
    mesh = fem.build_mesh(geometry, config.mesh_h_nm)
    mats = fem.assemble(mesh, profile, config.material)
    solution = fem.solve(mats, 3)
    _, m_dense = mats.dense()
    v = solution.coefficients[:, 1:-1]
    gram = v @ m_dense @ v.T
    worst = float(np.max(np.abs(gram - np.eye(3))))
    return CheckResult(
        "overlap orthogonality", worst < 1e-8,
        f"max |C M C^T - I| = {worst:.2e} (tol 1e-8)")


def _check_triangle(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(8.0, config.barrier_nm)
    constants = valley_pair_constants(config.material, config.constants_mode)
    solution, profile = fem.solve_well(geometry, config.material, 1e8,
                                       config.mesh_h_nm, n_states=2)
    ok, detail = True, []
    for n in range(2):
        r = coupling.valley_splitting(solution, n, profile, constants,
                                      config.gradient_sign)
        resum = 2.0 * abs(r.c_confinement + r.c_field + r.c_interface)
        bound = 2.0 * (abs(r.c_confinement) + abs(r.c_field)
                       + abs(r.c_interface))
        ok &= (abs(resum - r.delta_ev) <= 1e-15 + 1e-12 * r.delta_ev
               and r.delta_ev <= bound * (1.0 + 1e-12))
        detail.append(f"n={n}: delta {1e3 * r.delta_ev:.3f} meV <= "
                      f"bound {1e3 * bound:.3f} meV")
    return CheckResult("triangle inequality & decomposition resum", ok,
                       "; ".join(detail))


def _check_fundamental_theorem(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    profile = potential.build_profile(geometry, config.material, 7.3e7)
    slope, jumps = profile.derivative_parts()
    rng = np.random.default_rng(20260810)
    worst = 0.0
    for _ in range(64):
        za, zb = np.sort(rng.uniform(profile.z_min, profile.z_max, size=2))
        if zb - za < 1e-6:
            continue
        step = sum(dv for z_i, dv in jumps if za < z_i <= zb)
        lhs = slope * (zb - za) + step
        rhs = profile.value(zb) - profile.value(za)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return CheckResult(
        "derivative fundamental theorem", worst < 1e-12,
        f"worst |int dV - (V(b)-V(a))| relative = {worst:.2e} (tol 1e-12)")


def _check_translation(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    constants = valley_pair_constants(config.material, config.constants_mode)
    profile = potential.build_profile(geometry, config.material, 5e7)
    mesh = fem.build_mesh(geometry, config.mesh_h_nm)
    base = fem.solve(fem.assemble(mesh, profile, config.material), 1)
    dz = 1.3
    moved = fem.solve(fem.assemble(mesh.translated(dz),
                                   profile.translated(dz),
                                   config.material), 1)
    c0 = coupling.oscillatory_overlap(base, 0, profile, constants)
    c1 = coupling.oscillatory_overlap(moved, 0, profile.translated(dz),
                                      constants)
    phase = np.exp(-2j * constants.k0_inv_nm * dz)
    ph_dev = abs(c1 - phase * c0) / max(abs(c0), 1e-300)
    d0 = coupling.valley_splitting(base, 0, profile, constants,
                                   config.gradient_sign).delta_ev
    d1 = coupling.valley_splitting(moved, 0, profile.translated(dz),
                                   constants, config.gradient_sign).delta_ev
    d_dev = _rel(d0, d1)
    ok = ph_dev < 1e-8 and d_dev < 1e-8
    return CheckResult(
        "translation phase covariance", ok,
        f"overlap picks up exp(-2i K0 dz) to {ph_dev:.2e}; splitting "
        f"invariant to {d_dev:.2e} (tol 1e-8)")


def _check_zero_potential(config: SweepConfig) -> CheckResult:
    solution, profile = solve_hard_wall(6.0, 0.916, config.mesh_h_nm)
    constants = valley_pair_constants(config.material, "canonical")
    r = coupling.valley_splitting(solution, 0, profile, constants,
                                  config.gradient_sign)
    return CheckResult(
        "zero potential, zero splitting", r.delta_ev == 0.0,
        f"V = 0, F = 0 gives delta = {r.delta_ev} exactly")


def _check_variational(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    coarse, _ = fem.solve_well(geometry, config.material, 1e7, 0.1, n_states=3)
    fine, _ = fem.solve_well(geometry, config.material, 1e7, 0.05, n_states=3)
    worst = float(np.max(fine.energies - coarse.energies))
    return CheckResult(
        "variational monotonicity", worst <= 1e-10,
        f"max E(h/2) - E(h) = {worst:.2e} eV (refinement never raises levels)")


def _check_nodal(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    solution, _ = fem.solve_well(geometry, config.material, 1e8,
                                 config.mesh_h_nm)
    c = solution.coefficients[0]
    floor = float(np.min(c)) / float(np.max(np.abs(c)))
    return CheckResult(
        "ground state nodal theorem", floor > -1e-8,
        f"most negative ground-state coefficient {floor:.2e} of the peak")


def _check_spectrum_bounds(config: SweepConfig) -> CheckResult:
    geometry = potential.WellGeometry(6.0, config.barrier_nm)
    profile = potential.build_profile(geometry, config.material, 1e8)
    mesh = fem.build_mesh(geometry, config.mesh_h_nm)
    solution = fem.solve(fem.assemble(mesh, profile, config.material), 4)
    v_nodes = profile.value(mesh.nodes)
    m_min = min(config.material.m_z_well, config.material.m_z_barrier)
    h_min = float(np.min(mesh.element_lengths))
    kinetic_cap = 12.0 * KINETIC_EV_NM2 / (m_min * h_min**2)
    lo, hi = float(np.min(v_nodes)), float(np.max(v_nodes)) + kinetic_cap
    ok = bool(np.all(solution.energies >= lo - 1e-12)
              and np.all(solution.energies <= hi))
    return CheckResult(
        "spectrum bounds", ok,
        f"E in [{1e3 * solution.energies[0]:.1f}, "
        f"{1e3 * solution.energies[-1]:.1f}] meV within "
        f"[{1e3 * lo:.1f}, {1e3 * hi:.1f}] meV")


def _check_constants_stability(config: SweepConfig) -> CheckResult:
    tuples = set()
    for mat in (config.material, SIO2_SI,
                SIO2_SI.with_overrides(delta_ec_ev=1.0)):
        c = valley_pair_constants(mat, "canonical")
        tuples.add((c.i56, c.c_j, c.p_v))
    ok = tuples == {(CANONICAL_I56, CANONICAL_CJ, CANONICAL_PV)}
    return CheckResult(
        "canonical constants bit-stable", ok,
        "(-0.217, 0.414, 1.045) independent of material/geometry/field")


def run_oracles(config: SweepConfig | None = None) -> OracleReport:
    """Run the full oracle battery with the given (or default) configuration."""
    cfg = config or default_config()
    checks: list[CheckResult] = []
    checks.append(_check_kinetic_prefactor())
    checks.append(_check_unit_round_trips())
    checks.extend(_check_constants(cfg))
    checks.extend(_check_hard_wall(cfg))
    checks.append(_check_convergence())
    checks.append(_check_quadrature(cfg))
    checks.append(_check_gauge_shift(cfg))
    checks.append(_check_mirror(cfg))
    checks.append(_check_normalization(cfg))
    checks.append(_check_m_orthogonality(cfg))
    checks.append(_check_triangle(cfg))
    checks.append(_check_fundamental_theorem(cfg))
    checks.append(_check_translation(cfg))
    checks.append(_check_zero_potential(cfg))
    checks.append(_check_variational(cfg))
    checks.append(_check_nodal(cfg))
    checks.append(_check_spectrum_bounds(cfg))
    checks.append(_check_constants_stability(cfg))
    return OracleReport(tuple(checks))

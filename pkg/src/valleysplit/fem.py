"""Linear finite elements for the 1D effective-mass Hamiltonian.

H = -(hbar^2/2) d/dz (1/m(z)) d/dz + V(z) on an interval with Dirichlet ends,
assembled as a generalized symmetric tridiagonal pair (H, M).  The weak form
integrates (hbar^2/2m) psi' phi' element by element, so continuity of psi and
psi'/m across mass steps needs no extra bookkeeping.  All element integrals
(including the linear field term against products of linear basis functions)
are exact, so the mesh only has to resolve the wavefunction itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .materials import KINETIC_EV_NM2, MaterialSystem
from .potential import PotentialProfile, WellGeometry

_NODE_ATOL = 1e-9  # nm; positions closer than this count as the same node


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Strictly increasing nodes plus a per-element material-region tag."""

    nodes: np.ndarray
    regions: tuple  # per element: "well" | "barrier"

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing, >= 2 entries")
        if len(self.regions) != nodes.size - 1:
            raise ValueError("need one region tag per element")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def element_lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def node_index(self, z: float) -> int:
        """Index of the node at z; raises if z is not (exactly) a node."""
        i = int(np.searchsorted(self.nodes, z))
        for j in (i - 1, i, i + 1):
            if 0 <= j < self.nodes.size and abs(self.nodes[j] - z) <= _NODE_ATOL:
                return j
        raise ValueError(f"z = {z} nm is not a mesh node")

    def mirrored(self) -> "Mesh1D":
        return Mesh1D(-self.nodes[::-1], self.regions[::-1])

    def translated(self, dz_nm: float) -> "Mesh1D":
        return Mesh1D(self.nodes + dz_nm, self.regions)


def _region_nodes(z0: float, z1: float, target_h: float) -> np.ndarray:
    n = max(1, int(np.ceil((z1 - z0) / target_h - 1e-12)))
    return np.linspace(z0, z1, n + 1)


def build_mesh(geometry: WellGeometry, target_h: float) -> Mesh1D:
    """Region-wise uniform mesh with spacing <= target_h.

    Node counts are rounded up per region, so both interfaces and the domain
    edges are exact nodes.
    """
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    spans = [(geometry.z_min, geometry.z_left, "barrier"),
             (geometry.z_left, geometry.z_right, "well"),
             (geometry.z_right, geometry.z_max, "barrier")]
    nodes = [geometry.z_min]
    regions: list = []
    for z0, z1, tag in spans:
        zs = _region_nodes(z0, z1, target_h)
        regions += [tag] * (zs.size - 1)
        nodes.extend(zs[1:])
    return Mesh1D(np.array(nodes), tuple(regions))


def uniform_mesh(z_min: float, z_max: float, target_h: float,
                 region: str = "well") -> Mesh1D:
    """Single-region mesh; used for hard-wall oracle problems."""
    if z_max <= z_min:
        raise ValueError("empty interval")
    zs = _region_nodes(z_min, z_max, target_h)
    return Mesh1D(zs, (region,) * (zs.size - 1))


@dataclass(frozen=True, eq=False)
class FemMatrices:
    """Symmetric tridiagonal pair over interior nodes (Dirichlet rows removed).

    `diag`/`off` hold the Hamiltonian, `m_diag`/`m_off` the overlap.
    """

    diag: np.ndarray
    off: np.ndarray
    m_diag: np.ndarray
    m_off: np.ndarray
    mesh: Mesh1D

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self):
        h = np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)
        m = np.diag(self.m_diag) + np.diag(self.m_off, 1) + np.diag(self.m_off, -1)
        return h, m


def _check_alignment(mesh: Mesh1D, profile: PotentialProfile) -> None:
    if (abs(mesh.nodes[0] - profile.z_min) > _NODE_ATOL
            or abs(mesh.nodes[-1] - profile.z_max) > _NODE_ATOL):
        raise ValueError("mesh does not span the potential domain")
    for bp in profile.breakpoints[1:-1]:
        mesh.node_index(bp)  # raises if a breakpoint misses the mesh


def assemble(mesh: Mesh1D, profile: PotentialProfile,
             material: MaterialSystem) -> FemMatrices:
    """Assemble the (H, M) pair with exact per-element integration.

    Kinetic: (hbar^2/2m) * [[1,-1],[-1,1]]/h per element, with m constant per
    region.  Potential: (c + s*z) integrated exactly against products of the
    two linear basis functions.  Overlap: the standard h/6 * [[2,1],[1,2]].
    """
    _check_alignment(mesh, profile)
    za = mesh.nodes[:-1]
    h = mesh.element_lengths
    mass_of = {"well": material.m_z_well, "barrier": material.m_z_barrier}
    try:
        m_e = np.array([mass_of[r] for r in mesh.regions])
    except KeyError as exc:
        raise ValueError(f"unknown region tag {exc.args[0]!r}") from exc

    s = profile.slope_ev_per_nm
    # fold the slope origin into the per-element constant: V = c + s*z
    c_e = profile.segment_values_at(mesh.midpoints) - s * profile.slope_origin_nm

    kin = KINETIC_EV_NM2 / (m_e * h)
    # overlap element entries
    m00 = h / 3.0
    m01 = h / 6.0
    # integrals of z * phi_i * phi_j over the element
    z00 = h * za / 3.0 + h * h / 12.0
    z01 = h * za / 6.0 + h * h / 12.0
    z11 = h * za / 3.0 + h * h / 4.0

    a00 = kin + c_e * m00 + s * z00
    a11 = kin + c_e * m00 + s * z11
    a01 = -kin + c_e * m01 + s * z01

    n = mesh.n_nodes
    diag = np.zeros(n)
    diag[:-1] += a00
    diag[1:] += a11
    mdiag = np.zeros(n)
    mdiag[:-1] += m00
    mdiag[1:] += m00

    return FemMatrices(diag=diag[1:-1], off=a01[1:-1],
                       m_diag=mdiag[1:-1], m_off=m01[1:-1], mesh=mesh)


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Lowest subband energies and L2-normalized piecewise-linear envelopes."""

    mesh: Mesh1D
    energies: np.ndarray            # eV, ascending
    coefficients: np.ndarray        # (n_states, n_nodes), zero at the ends

    @property
    def n_states(self) -> int:
        return self.energies.size

    def _check_n(self, n: int) -> None:
        if not 0 <= n < self.n_states:
            raise IndexError(f"subband {n} not solved (have {self.n_states})")

    def psi(self, n: int, z):
        """Envelope of subband n at z (nm^-1/2), linear between nodes."""
        self._check_n(n)
        zz = np.asarray(z, dtype=float)
        nodes = self.mesh.nodes
        if np.any(zz < nodes[0] - 1e-12) or np.any(zz > nodes[-1] + 1e-12):
            raise ValueError("z outside the mesh")
        out = np.interp(zz, nodes, self.coefficients[n])
        return float(out) if np.isscalar(z) else out

    def psi_at_node(self, n: int, z: float) -> float:
        """Exact nodal value at a position that must be a mesh node."""
        self._check_n(n)
        return float(self.coefficients[n][self.mesh.node_index(z)])

    def dump_csv(self, path) -> None:
        """Debug dump: columns z, psi_0 ... psi_{k-1}."""
        header = "z," + ",".join(f"psi_{i}" for i in range(self.n_states))
        data = np.column_stack([self.mesh.nodes, self.coefficients.T])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.9g")


def solve(matrices: FemMatrices, n_states: int) -> EigenSolution:
    """Lowest n_states of H c = E M c by symmetric-definite reduction.

    The LAPACK driver factors M, transforms to a standard symmetric problem,
    solves, and back-transforms; eigenvectors come out M-orthonormal, which
    for the P1 overlap matrix is exactly the L2 normalization of psi.
    """
    if not 1 <= n_states <= matrices.size:
        raise ValueError(f"n_states must be in [1, {matrices.size}]")
    hd, md = matrices.dense()
    try:
        vals, vecs = scipy.linalg.eigh(hd, md, subset_by_index=(0, n_states - 1))
    except scipy.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"generalized eigensolve failed ({exc}); a non-positive-definite "
            "overlap matrix signals a broken mesh") from exc

    n = matrices.mesh.n_nodes
    coef = np.zeros((n_states, n))
    coef[:, 1:-1] = vecs.T
    # sign convention: first interior node (first nonzero entry as fallback) >= 0
    for row in coef:
        lead = row[1]
        if lead == 0.0:
            nz = np.flatnonzero(row)
            lead = row[nz[0]] if nz.size else 1.0
        if lead < 0:
            row *= -1.0
    return EigenSolution(mesh=matrices.mesh, energies=vals, coefficients=coef)


def solve_well(geometry: WellGeometry, material: MaterialSystem,
               field_v_per_m: float = 0.0, target_h: float = 0.05,
               n_states: int = 1):
    """Convenience: build profile + mesh, assemble, solve.

    Returns (solution, profile).
    """
    from .potential import build_profile
    profile = build_profile(geometry, material, field_v_per_m)
    mesh = build_mesh(geometry, target_h)
    return solve(assemble(mesh, profile, material), n_states), profile


@dataclass(frozen=True)
class ConvergenceStudy:
    """Rows of (h, E, error vs extrapolated), finest mesh last."""

    h_values: tuple
    energies: tuple
    observed_order: float
    extrapolated: float

    @property
    def errors(self) -> tuple:
        return tuple(e - self.extrapolated for e in self.energies)


def convergence_study(energy_at_h: Callable[[float], float],
                      h_values: Sequence[float]) -> ConvergenceStudy:
    """Measure the convergence order of an eigenvalue in the mesh size.

    `h_values` must be >= 3 sizes in geometric progression (any order); P1
    elements should show order ~2.  The Richardson extrapolation uses the
    measured order from the finest triple.
    """
    hs = sorted((float(h) for h in h_values), reverse=True)  # coarse -> fine
    if len(hs) < 3:
        raise ValueError("need at least three mesh sizes")
    ratios = [hs[i] / hs[i + 1] for i in range(len(hs) - 1)]
    r = ratios[0]
    if any(abs(q - r) > 1e-6 * r for q in ratios):
        raise ValueError("mesh sizes must form a geometric progression")
    energies = [float(energy_at_h(h)) for h in hs]
    d1 = energies[-3] - energies[-2]
    d2 = energies[-2] - energies[-1]
    if d2 == 0.0 or d1 / d2 <= 0:
        raise ValueError("eigenvalue differences do not decrease monotonically")
    order = float(np.log(d1 / d2) / np.log(r))
    extrapolated = energies[-1] + d2 / (r**order - 1.0)
    return ConvergenceStudy(tuple(hs), tuple(energies), order, extrapolated)

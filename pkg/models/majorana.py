"""Free-Majorana solution of the honeycomb model in a fixed Z2 gauge.

Each spin carries Majoranas b^x, b^y, b^z, c with s^a = i b^a c and the
physical constraint D = b^x b^y b^z c = 1. On a bond (A, B) of type a,

    -J s^a_A s^a_B = i J u c_A c_B,    u = i b^a_A b^a_B

so H = (i/4) sum_jk A_jk c_j c_k with A_AB = 2 J u and A_BA = -2 J u. The
spectrum of iA is {+-eps_m} and the free ground energy is -1/2 sum eps_m. The
plaquette operator equals the product of u around the hexagon.

Fermion parity: on a torus the physical states obey

    (-1)^N_f = sgn(perm) * (-1)^(N/2) * prod_bonds u * sign Pf(A)

where perm reorders the Majoranas from site order (b^x b^y b^z c per site) to
bond order followed by the c's. When the free ground state has the wrong
parity the lowest mode is occupied. Open lattices leave some b Majoranas
unpaired, which absorbs the constraint.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh, schur

import config
from models.errors import DomainError, FluxConstraintError, NumericError, UnsupportedSectorError
from models.lattice import Boundary, HoneycombLattice, Sublattice, build_lattice, site_index
from models.spin_ed import CouplingParams

logger = logging.getLogger(__name__)

_MAJORANA_SLOT = {"x": 0, "y": 1, "z": 2, "c": 3}


class Phase(str, Enum):
    A_GAPPED = "A_gapped"
    B_GAPLESS = "B_gapless"


class ParityNote(str, Enum):
    PHYSICAL = "physical"
    FLIPPED = "flipped"


@dataclass(frozen=True)
class GaugeConfig:
    u: Tuple[int, ...]  # per bond index, u_jk with j on sublattice A

    @classmethod
    def uniform(cls, lattice: HoneycombLattice) -> "GaugeConfig":
        return cls(u=(1,) * len(lattice.bonds))

    def flipped(self, bonds: Iterable[int]) -> "GaugeConfig":
        u = list(self.u)
        for b in bonds:
            u[b] = -u[b]
        return GaugeConfig(u=tuple(u))

    def gauge_transform(self, lattice: HoneycombLattice, sites: Iterable[int]) -> "GaugeConfig":
        """Flip u on every bond touching each given site (fluxes unchanged)"""
        touched = []
        for site in sites:
            touched += [b.index for b in lattice.bonds if site in b.pair]
        return self.flipped(touched)

    def to_dict(self) -> dict:
        return {"u": list(self.u)}


@dataclass
class SkewMatrix:
    A: np.ndarray
    warnings: List[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.A.shape[0]


@dataclass
class SectorSpectrum:
    epsilons: np.ndarray  # ascending, non-negative, length N/2
    ground_energy: float
    parity_note: ParityNote = ParityNote.PHYSICAL
    free_energy: float = 0.0  # -1/2 sum eps, before parity projection
    holonomy: Optional[Tuple[int, int]] = None

    @property
    def min_epsilon(self) -> float:
        return float(self.epsilons[0]) if len(self.epsilons) else 0.0

    def to_dict(self) -> dict:
        return {
            "epsilons": [float(e) for e in self.epsilons],
            "ground_energy": self.ground_energy,
            "free_energy": self.free_energy,
            "parity_note": self.parity_note.value,
            "holonomy": list(self.holonomy) if self.holonomy else None,
        }


def flux_of(lattice: HoneycombLattice, gauge: GaugeConfig) -> List[int]:
    """w_p = product of u over the boundary bonds of p"""
    return [int(np.prod([gauge.u[b] for b in plaquette.bonds])) for plaquette in lattice.plaquettes]


def validate_flux(lattice: HoneycombLattice, target_flux: Sequence[int]) -> List[int]:
    if len(target_flux) != lattice.num_plaquettes:
        raise FluxConstraintError("flux_length", len(target_flux), lattice.num_plaquettes)
    flux = [int(w) for w in target_flux]
    if any(w not in (1, -1) for w in flux):
        raise FluxConstraintError("flux_values", list(target_flux))
    if lattice.is_torus and math.prod(flux) != 1:
        raise FluxConstraintError("flux_constraint")
    return flux


def gauge_from_flux(lattice: HoneycombLattice, target_flux: Sequence[int]) -> GaugeConfig:
    """u configuration realizing target_flux, built from strings between vortex pairs.

    Vortices are paired in ascending label order and joined by the shortest
    dual path. On an open lattice an unpaired vortex is routed out through
    the nearest edge.
    """
    flux = validate_flux(lattice, target_flux)
    vortices = [p for p, w in enumerate(flux) if w == -1]
    gauge = GaugeConfig.uniform(lattice)
    for first, second in zip(vortices[0::2], vortices[1::2]):
        gauge = gauge.flipped(lattice.dual_path(first, second))
    if len(vortices) % 2:
        gauge = gauge.flipped(lattice.dual_path_to_edge(vortices[-1]))

    realized = flux_of(lattice, gauge)
    if realized != flux:
        raise NumericError("sector_mismatch", "gauge", realized)
    return gauge


def holonomy_bonds(lattice: HoneycombLattice) -> Tuple[List[int], List[int]]:
    """Bonds cut by the two non-contractible dual loops of a torus (x-seam, y-seam)"""
    Lx, Ly = lattice.Lx, lattice.Ly
    x_seam = [
        lattice.bond_between(site_index(row, 0, Sublattice.A, Lx), site_index(row, Lx - 1, Sublattice.B, Lx)).index
        for row in range(Ly)
    ]
    y_seam = [
        lattice.bond_between(site_index(0, col, Sublattice.A, Lx), site_index(Ly - 1, col, Sublattice.B, Lx)).index
        for col in range(Lx)
    ]
    return x_seam, y_seam


def holonomy_gauges(lattice: HoneycombLattice, gauge: GaugeConfig) -> List[Tuple[Tuple[int, int], GaugeConfig]]:
    """The four gauge classes sharing the fluxes of `gauge` (just `gauge` on open lattices)"""
    if not lattice.is_torus:
        return [((0, 0), gauge)]
    x_seam, y_seam = holonomy_bonds(lattice)
    classes = []
    for flip_x, flip_y in product((0, 1), repeat=2):
        bonds = (x_seam if flip_x else []) + (y_seam if flip_y else [])
        classes.append(((flip_x, flip_y), gauge.flipped(bonds)))
    return classes


def majorana_matrix(lattice: HoneycombLattice, gauge: GaugeConfig, params: CouplingParams) -> SkewMatrix:
    """A_jk = 2 J_a u_jk on bonds (j on sublattice A), antisymmetric"""
    warnings = []
    if params.has_field:
        note = f"field {params.h} ignored by the quadratic Majorana form"
        logger.warning(note)
        warnings.append(note)
    N = lattice.num_sites
    A = np.zeros((N, N))
    for bond in lattice.bonds:
        j, k = bond.pair
        value = 2.0 * params.J[bond.link_type.value] * gauge.u[bond.index]
        A[j, k] += value
        A[k, j] -= value
    return SkewMatrix(A=A, warnings=warnings)


def _permutation_sign(order: Sequence[int]) -> int:
    """Sign of the permutation listing `order` (a rearrangement of 0..n-1)"""
    seen = np.zeros(len(order), dtype=bool)
    cycles = 0
    for start in range(len(order)):
        if seen[start]:
            continue
        cycles += 1
        k = start
        while not seen[k]:
            seen[k] = True
            k = order[k]
    return -1 if (len(order) - cycles) % 2 else 1


def parity_constraint(lattice: HoneycombLattice, gauge: GaugeConfig) -> Optional[int]:
    """sgn(perm) * (-1)^(N/2) * prod u, or None when unpaired b Majoranas exist"""
    N = lattice.num_sites
    if len(lattice.bonds) != 3 * N // 2 or any(
        len({b.link_type for b in lattice.bonds if site in b.pair}) != 3 for site in range(N)
    ):
        return None
    order = []
    for bond in lattice.bonds:
        slot = _MAJORANA_SLOT[bond.link_type.value]
        j, k = bond.pair
        order += [4 * j + slot, 4 * k + slot]
    order += [4 * j + _MAJORANA_SLOT["c"] for j in range(N)]
    sign = _permutation_sign(order)
    return sign * (-1) ** (N // 2) * int(np.prod(gauge.u))


def pfaffian_sign(A: np.ndarray) -> Optional[int]:
    """sign Pf(A) from the real Schur form, None if A is singular"""
    T, Z = schur(A, output="real")
    N = A.shape[0]
    tol = config.ZERO_MODE_TOL * max(1.0, float(np.abs(A).max()))
    sign = 1 if np.linalg.det(Z) > 0 else -1
    k = 0
    while k < N:
        if k + 1 >= N or abs(T[k + 1, k]) <= tol:
            return None
        sign *= 1 if T[k, k + 1] > 0 else -1
        k += 2
    return sign


def sector_spectrum(A, constraint: Optional[int] = None) -> SectorSpectrum:
    """Single-particle energies of H = (i/4) c^T A c and the sector ground energy.

    Without a constraint the free ground energy -1/2 sum eps is returned. With
    one (see parity_constraint) the lowest mode is occupied when the free
    ground state has unphysical parity.
    """
    A = A.A if isinstance(A, SkewMatrix) else np.asarray(A, dtype=float)
    N = A.shape[0]
    if N % 2:
        raise DomainError("odd_majoranas", N)
    if not np.array_equal(A.T, -A):
        raise DomainError("not_skew")
    try:
        levels = eigvalsh(1j * A)
    except np.linalg.LinAlgError as e:
        raise NumericError("eig_failure", str(e))
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(levels + levels[::-1]).max(initial=0.0) > config.PAIRING_TOL * scale:
        raise NumericError("eig_failure", "eigenvalues of iA are not paired as +-eps")
    epsilons = np.sort(np.abs(levels[N // 2:]))
    free = -0.5 * float(epsilons.sum())

    spectrum = SectorSpectrum(epsilons=epsilons, ground_energy=free, free_energy=free)
    if constraint is None or N == 0 or epsilons[0] <= config.ZERO_MODE_TOL * scale:
        return spectrum
    orientation = pfaffian_sign(A)
    if orientation is not None and constraint * orientation == -1:
        spectrum.ground_energy = free + float(epsilons[0])
        spectrum.parity_note = ParityNote.FLIPPED
    return spectrum


def gauge_spectrum(lattice: HoneycombLattice, gauge: GaugeConfig, params: CouplingParams) -> SectorSpectrum:
    """Parity-projected spectrum for one gauge configuration"""
    return sector_spectrum(majorana_matrix(lattice, gauge, params), parity_constraint(lattice, gauge))


def sector_ground_energy(lattice: HoneycombLattice, params: CouplingParams, flux: Sequence[int]) -> SectorSpectrum:
    """Lowest physical energy with the given fluxes, minimized over holonomy classes"""
    if params.has_field:
        raise UnsupportedSectorError("field_sector", params.h)
    gauge = gauge_from_flux(lattice, flux)
    best = None
    for holonomy, candidate in holonomy_gauges(lattice, gauge):
        spectrum = gauge_spectrum(lattice, candidate, params)
        spectrum.holonomy = holonomy
        if best is None or spectrum.ground_energy < best.ground_energy:
            best = spectrum
    return best


def vortex_gap(lattice: HoneycombLattice, params: CouplingParams, flux_pattern: Sequence[int]) -> float:
    """E_ground(flux_pattern) - E_ground(vortex-free)"""
    excited = sector_ground_energy(lattice, params, flux_pattern)
    vacuum = sector_ground_energy(lattice, params, [1] * lattice.num_plaquettes)
    return excited.ground_energy - vacuum.ground_energy


def all_flux_patterns(lattice: HoneycombLattice) -> List[List[int]]:
    """Every admissible flux pattern (even vortex number on a torus)"""
    patterns = []
    for bits in product((1, -1), repeat=lattice.num_plaquettes):
        if lattice.is_torus and math.prod(bits) != 1:
            continue
        patterns.append(list(bits))
    return patterns


def classify_phase(params: CouplingParams) -> Phase:
    """B when every |J_a| <= sum of the other two (equality counts as B)"""
    x, y, z = abs(params.Jx), abs(params.Jy), abs(params.Jz)
    if x <= y + z and y <= z + x and z <= x + y:
        return Phase.B_GAPLESS
    return Phase.A_GAPPED


def bulk_gap(params: CouplingParams, size: int) -> float:
    """Smallest eps of the uniform gauge on a size x size torus"""
    lattice = build_lattice(size, size, Boundary.TORUS)
    spectrum = sector_spectrum(majorana_matrix(lattice, GaugeConfig.uniform(lattice), params))
    return spectrum.min_epsilon


def bulk_gap_estimate(params: CouplingParams, sizes: Sequence[int]) -> List[Tuple[int, float]]:
    """(N, gap) on L x L tori for each linear size L, N = 2 L^2 sites; sizes ascending"""
    if params.has_field:
        raise UnsupportedSectorError("field_sector", params.h)
    if list(sizes) != sorted(sizes):
        raise DomainError("bad_config", f"sizes must be ascending: {list(sizes)}")
    return [(2 * int(L) ** 2, bulk_gap(params, int(L))) for L in sizes]


def ternary_grid(step: float) -> List[Tuple[float, float, float]]:
    """Points (Jx, Jy, Jz) with Jx + Jy + Jz = 1 on a grid of the given spacing"""
    n = int(round(1.0 / step))
    if n < 1 or not math.isclose(n * step, 1.0, rel_tol=1e-9):
        raise DomainError("bad_config", f"phase-diagram step must divide 1 (got {step})")
    return [(i / n, j / n, (n - i - j) / n) for i in range(n + 1) for j in range(n + 1 - i)]


def phase_point(Jx: float, Jy: float, Jz: float, gap_size: int) -> dict:
    """One phase-diagram row with couplings normalized to Jx + Jy + Jz = 1"""
    total = abs(Jx) + abs(Jy) + abs(Jz)
    params = CouplingParams(Jx=Jx / total, Jy=Jy / total, Jz=Jz / total)
    return {
        "Jx": params.Jx,
        "Jy": params.Jy,
        "Jz": params.Jz,
        "phase": classify_phase(params).value,
        "gap": bulk_gap(params, gap_size),
    }

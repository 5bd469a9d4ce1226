"""Exact diagonalization of the honeycomb spin Hamiltonian.

    H = -sum_nu J_nu sum_{nu-links} s^nu s^nu - sum_j (hx s^x_j + hy s^y_j + hz s^z_j)

Operators are kept as Pauli sums and turned into scipy CSR matrices on demand.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import eigh

import config
from models.errors import (
    DomainError,
    FluxConstraintError,
    NumericError,
    RegisterError,
    ResourceLimitError,
    UnsupportedSectorError,
)
from models.lanczos import lowest_eigenpairs
from models.lattice import HoneycombLattice, LinkType
from models.pauli_algebra import (
    PauliString,
    StateVector,
    apply_masks,
    basis_indices,
    bit_parity,
    commutes,
    expectation,
    plaquette_operator,
    product,
)

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")


@dataclass
class CouplingParams:
    Jx: float = 0.0
    Jy: float = 0.0
    Jz: float = 0.0
    hx: float = 0.0
    hy: float = 0.0
    hz: float = 0.0
    warnings: List[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        values = self.as_tuple()
        if not all(math.isfinite(v) for v in values):
            raise DomainError("couplings_invalid", values)

    @property
    def J(self) -> Dict[str, float]:
        return {"x": self.Jx, "y": self.Jy, "z": self.Jz}

    @property
    def h(self) -> Dict[str, float]:
        return {"x": self.hx, "y": self.hy, "z": self.hz}

    @property
    def has_field(self) -> bool:
        return any(v != 0.0 for v in self.h.values())

    def as_tuple(self) -> Tuple[float, ...]:
        return (self.Jx, self.Jy, self.Jz, self.hx, self.hy, self.hz)

    def to_dict(self) -> dict:
        return {"Jx": self.Jx, "Jy": self.Jy, "Jz": self.Jz, "hx": self.hx, "hy": self.hy, "hz": self.hz}


@dataclass
class SparseOperator:
    """Hermitian Pauli sum sum_k c_k P_k with real c_k"""

    terms: List[Tuple[float, PauliString]]
    n_spins: int
    lattice: Optional[HoneycombLattice] = field(default=None, compare=False, repr=False)
    params: Optional[CouplingParams] = field(default=None, compare=False)
    warnings: List[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        self.terms = _combine_terms(self.terms)

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    @property
    def scale(self) -> float:
        """sum |c_k|, an upper bound on the operator norm"""
        return float(sum(abs(c) for c, _ in self.terms)) or 1.0

    def term_map(self) -> Dict[Tuple, float]:
        return {P.letters: c for c, P in self.terms}

    def field_free(self) -> bool:
        return all(len(P.letters) != 1 for _, P in self.terms)

    def commutes_with(self, P: PauliString) -> bool:
        return all(commutes(term, P) for _, term in self.terms)

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        """CSR matrix, real whenever every string has an even number of Y letters"""
        indices = basis_indices(self.n_spins)
        blocks: Dict[int, np.ndarray] = {}
        is_complex = False
        for c, P in self.terms:
            x_mask, z_mask, n_y = P.masks
            factor = c * 1j ** ((P.phase + n_y) % 4)
            is_complex |= abs(factor.imag) > 0
            # element (b ^ x, b) of X^x Z^z is (-1)^popcount(b & z)
            signs = 1.0 - 2.0 * bit_parity(indices, z_mask)
            blocks[x_mask] = blocks.get(x_mask, 0) + factor * signs
        dtype = complex if is_complex else float
        rows, cols, data = [], [], []
        for x_mask, values in blocks.items():
            rows.append(indices ^ x_mask)
            cols.append(indices)
            data.append(values if is_complex else values.real)
        if not data:
            return sparse.csr_matrix((self.dim, self.dim), dtype=dtype)
        matrix = sparse.coo_matrix(
            (np.concatenate(data).astype(dtype), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )
        return matrix.tocsr()

    def matvec(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator(self.terms + other.terms, self.n_spins, self.lattice, self.params,
                              self.warnings + other.warnings)

    def to_dict(self) -> dict:
        return {"n_spins": self.n_spins, "terms": [[c, str(P)] for c, P in self.terms]}


def _combine_terms(terms) -> List[Tuple[float, PauliString]]:
    # fold the sign phase into the coefficient, merge equal strings, drop zeros
    merged: Dict[Tuple, float] = {}
    for c, P in terms:
        if not P.is_hermitian:
            raise DomainError("bad_pauli_text", f"{P} is not Hermitian")
        value = float(c) * (-1.0 if P.phase == 2 else 1.0)
        merged[P.letters] = merged.get(P.letters, 0.0) + value
    return [(c, PauliString(0, letters)) for letters, c in merged.items() if c != 0.0]


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: List[StateVector]
    residuals: List[float]
    solver: str = "dense"
    warnings: List[str] = field(default_factory=list)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> StateVector:
        return self.eigenvectors[0]

    def multiplets(self, scale: float = 1.0) -> List[List[int]]:
        """Indices grouped into levels closer than DEGENERACY_TOL * scale"""
        groups: List[List[int]] = []
        for i, value in enumerate(self.eigenvalues):
            if groups and value - self.eigenvalues[groups[-1][-1]] <= config.DEGENERACY_TOL * scale:
                groups[-1].append(i)
            else:
                groups.append([i])
        return groups

    def to_dict(self, dump_vectors: bool = False) -> dict:
        payload = {
            "solver": self.solver,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
        }
        if self.warnings:
            payload["warnings"] = list(self.warnings)
        if dump_vectors:
            # interleaved [re0, im0, re1, im1, ...]
            payload["eigenvectors"] = [
                np.column_stack([v.amplitudes.real, v.amplitudes.imag]).ravel().tolist()
                for v in self.eigenvectors
            ]
        return payload


def build_hamiltonian(lattice: HoneycombLattice, params: CouplingParams) -> SparseOperator:
    """Kitaev exchange on every bond plus the Zeeman field on every site"""
    n = lattice.num_sites
    if n > config.ED_MAX_SPINS:
        raise ResourceLimitError("too_many_spins", n, config.ED_MAX_SPINS)
    if all(v == 0.0 for v in params.J.values()):
        raise DomainError("couplings_invalid", params.as_tuple())

    terms = []
    for bond in lattice.bonds:
        axis = bond.link_type.value
        i, j = bond.pair
        terms.append((-params.J[axis], PauliString.from_letters({i: axis, j: axis})))
    for site in range(n):
        for axis in AXES:
            if params.h[axis] != 0.0:
                terms.append((-params.h[axis], PauliString.single(site, axis)))
    H = SparseOperator(terms, n, lattice=lattice, params=params)
    logger.debug("Built H on %d spins with %d terms", n, len(H.terms))
    return H


def ground_states(
    H: SparseOperator,
    k: int = 1,
    tol: float = config.RESIDUAL_TOL,
    seed: int = config.DEFAULT_SEED,
    solver: str = "auto",
    projector=None,
) -> EigenResult:
    """k lowest eigenpairs; dense eigh up to DENSE_MAX_SPINS, Lanczos above (or when forced).

    `tol` is relative: residuals are bounded by tol * H.scale.
    """
    if k < 1 or k > H.dim:
        raise DomainError("bad_k", k, H.dim)
    use_dense = solver == "dense" or (solver == "auto" and H.n_spins <= config.DENSE_MAX_SPINS)
    matrix = H.matrix
    if use_dense:
        try:
            values, vectors = eigh(matrix.toarray(), subset_by_index=[0, k - 1])
        except np.linalg.LinAlgError as e:
            raise NumericError("eig_failure", str(e))
        columns = [vectors[:, i] for i in range(k)]
    else:
        dtype = complex if np.iscomplexobj(matrix.data) else float
        values, columns, _ = lowest_eigenpairs(
            H.matvec, H.dim, k, tol * H.scale, seed=seed, dtype=dtype, projector=projector,
        )
    states = [StateVector.from_array(v, H.n_spins) for v in columns]
    residuals = [float(np.linalg.norm(H.matvec(s.amplitudes) - e * s.amplitudes)) for e, s in zip(values, states)]
    return EigenResult(
        eigenvalues=np.asarray(values, dtype=float),
        eigenvectors=states,
        residuals=residuals,
        solver="dense" if use_dense else "lanczos",
        warnings=list(H.warnings),
    )


@dataclass
class WpProfile:
    values: List[float]
    mixed: List[int]  # plaquettes whose |<W_p>| is below MIXED_WP_THRESHOLD

    def __len__(self):
        return len(self.values)

    def __getitem__(self, p):
        return self.values[p]

    def __iter__(self):
        return iter(self.values)

    @property
    def is_sector_state(self) -> bool:
        return not self.mixed

    def vortices(self) -> List[int]:
        return [p for p, w in enumerate(self.values) if w < -config.MIXED_WP_THRESHOLD]


def wp_profile(psi: StateVector, lattice: HoneycombLattice) -> WpProfile:
    """<W_p> for every plaquette"""
    if psi.n_spins != lattice.num_sites or psi.n_ancilla:
        raise RegisterError("register_mismatch", psi.n_qubits, lattice.num_sites)
    values = [expectation(plaquette_operator(lattice, p), psi).real for p in range(lattice.num_plaquettes)]
    mixed = [p for p, w in enumerate(values) if abs(w) < config.MIXED_WP_THRESHOLD]
    return WpProfile(values=values, mixed=mixed)


def vortex_pair(lattice: HoneycombLattice, site: int, axis: str = "z") -> Tuple[int, ...]:
    """Plaquettes whose W_p flips under s^axis on `site` (the two sharing its axis-link)"""
    kick = PauliString.single(lattice.site(site).index, LinkType(axis).value)
    return tuple(p for p in range(lattice.num_plaquettes)
                 if not commutes(kick, plaquette_operator(lattice, p)))


def vortex_kick(lattice: HoneycombLattice, vortices: Iterable[int]) -> PauliString:
    """Single-site kicks that carry the vortex-free sector to W_p = -1 on exactly `vortices`.

    Vortices are paired in ascending label order and joined by shortest dual
    paths; crossing a nu-link applies s^nu to its A site. On an open lattice a
    leftover vortex is led out through the edge.
    """
    labels = sorted({lattice.plaquette(p).label for p in vortices})
    if len(labels) % 2 and lattice.is_torus:
        raise FluxConstraintError("flux_constraint")
    crossed = []
    for start, stop in zip(labels[::2], labels[1::2]):
        crossed += lattice.dual_path(start, stop)
    if len(labels) % 2:
        crossed += lattice.dual_path_to_edge(labels[-1])
    kicks = [PauliString.single(lattice.bonds[b].pair[0], lattice.bonds[b].link_type.value) for b in crossed]
    return product(kicks)


def conjugate_hamiltonian(H: SparseOperator, site: int, axis: str) -> SparseOperator:
    """s^axis_site H s^axis_site, term by term (anticommuting terms change sign)"""
    kick = PauliString.single(site, LinkType(axis).value)
    terms = [(c if commutes(kick, P) else -c, P) for c, P in H.terms]
    return SparseOperator(terms, H.n_spins, H.lattice, H.params, list(H.warnings))


def two_vortex_hamiltonian(H: SparseOperator, i: int) -> SparseOperator:
    """H_2v = s^z_i H s^z_i, checked against H + 2Jx s^x_i s^x_j + 2Jy s^y_i s^y_k"""
    conjugated = conjugate_hamiltonian(H, i, "z")
    transverse = [P for c, P in H.terms if len(P.letters) == 1 and P.letters[0][1] in ("X", "Y")]
    if transverse:
        note = f"transverse field present; two-bond identity check at site {i} skipped"
        logger.warning(note)
        conjugated.warnings.append(note)
        return conjugated
    if H.lattice is None:
        return conjugated

    original = H.term_map()
    expected = dict(original)
    for axis in ("x", "y"):
        bond = H.lattice.bond_at(i, axis)
        if bond is None:
            continue
        string = PauliString.from_letters({bond.pair[0]: axis, bond.pair[1]: axis})
        coupling = -original.get(string.letters, 0.0)
        expected[string.letters] = expected.get(string.letters, 0.0) + 2.0 * coupling
    actual = conjugated.term_map()
    keys = set(expected) | set(actual)
    deviation = max((abs(expected.get(key, 0.0) - actual.get(key, 0.0)) for key in keys), default=0.0)
    if deviation > 1e-14:
        raise NumericError("conjugation_identity", i, deviation)
    return conjugated


def _validate_flux(lattice: HoneycombLattice, target_flux: Sequence[int]) -> List[int]:
    if len(target_flux) != lattice.num_plaquettes:
        raise FluxConstraintError("flux_length", len(target_flux), lattice.num_plaquettes)
    flux = [int(w) for w in target_flux]
    if any(w not in (1, -1) for w in flux):
        raise FluxConstraintError("flux_values", list(target_flux))
    if lattice.is_torus and np.prod(flux) != 1:
        raise FluxConstraintError("flux_constraint")
    return flux


def sector_projector(lattice: HoneycombLattice, flux: Sequence[int]):
    """Vector map onto prod_p (1 + w_p W_p) / 2"""
    plaquette_masks = []
    for p, w in enumerate(flux):
        P = plaquette_operator(lattice, p)
        x_mask, z_mask, n_y = P.masks
        plaquette_masks.append((x_mask, z_mask, w * 1j ** ((P.phase + n_y) % 4)))

    def project(vector: np.ndarray) -> np.ndarray:
        for x_mask, z_mask, coefficient in plaquette_masks:
            flipped = apply_masks(vector, x_mask, z_mask, coefficient)
            vector = 0.5 * (vector + (flipped.real if np.isrealobj(vector) else flipped))
        return vector

    return project


def penalty_strength(H: SparseOperator, lattice: HoneycombLattice, factor: float = config.PENALTY_FACTOR) -> float:
    """c = factor * (|Jx| + |Jy| + |Jz|) * #plaquettes"""
    couplings = H.params.J.values() if H.params is not None else [1.0]
    return factor * sum(abs(J) for J in couplings) * lattice.num_plaquettes


def sector_ground(
    H: SparseOperator,
    lattice: HoneycombLattice,
    target_flux: Sequence[int],
    k: int = 1,
    penalty_factor: float = config.PENALTY_FACTOR,
    tol: float = config.RESIDUAL_TOL,
    seed: int = config.DEFAULT_SEED,
    solver: str = "auto",
) -> EigenResult:
    """Lowest k states of H with W_p = target_flux[p] for every p.

    Wrong-flux states are lifted by c * sum_p (1 - w_p W_p); the Lanczos path
    additionally projects onto the sector. Energies are those of H.
    """
    flux = _validate_flux(lattice, target_flux)
    if not H.field_free():
        raise UnsupportedSectorError("field_sector", H.params.h if H.params else "nonzero")

    c = penalty_strength(H, lattice, penalty_factor)
    penalty = [(c * lattice.num_plaquettes, PauliString.identity())]
    penalty += [(-c * w, plaquette_operator(lattice, p)) for p, w in enumerate(flux)]
    shifted = H + SparseOperator(penalty, H.n_spins)
    logger.info("Sector search with penalty c=%.6g for flux %s", c, flux)

    result = ground_states(shifted, k, tol=tol, seed=seed, solver=solver,
                           projector=sector_projector(lattice, flux))
    for index, state in enumerate(result.eigenvectors):
        profile = wp_profile(state, lattice)
        if max(abs(w - t) for w, t in zip(profile.values, flux)) > config.DEGENERACY_TOL:
            raise NumericError("sector_mismatch", index, [round(w, 6) for w in profile.values])
    result.residuals = [
        float(np.linalg.norm(H.matvec(s.amplitudes) - e * s.amplitudes))
        for e, s in zip(result.eigenvalues, result.eigenvectors)
    ]
    return result


def level_structure(eigenvalues: Sequence[float], multiplicity: int) -> dict:
    """Splitting inside the lowest `multiplicity` levels against the gap above them"""
    values = np.asarray(eigenvalues, dtype=float)
    splitting = float(values[multiplicity - 1] - values[0])
    report = {"multiplicity": multiplicity, "levels": values.tolist(), "splitting": splitting}
    if len(values) > multiplicity:
        gap = float(values[multiplicity] - values[multiplicity - 1])
        report["gap_above"] = gap
        report["ratio"] = splitting / gap if gap > 0 else math.inf
    return report


def effective_couplings(t_plus: Sequence[float], U: float) -> CouplingParams:
    """Superexchange couplings J = t^2 / (2U) and field h = 4 t^2 / U per direction"""
    if not U > 0:
        raise DomainError("bad_u", U)
    if len(t_plus) != 3 or any(t < 0 for t in t_plus):
        raise DomainError("bad_t", list(t_plus))
    J = [t * t / (2.0 * U) for t in t_plus]
    h = [4.0 * t * t / U for t in t_plus]
    params = CouplingParams(*J, *h)
    ratio = max(t_plus) / U
    if ratio > config.PERTURBATIVE_RATIO:
        note = f"t/U = {ratio:.3g} exceeds {config.PERTURBATIVE_RATIO}; superexchange estimate outside its regime"
        logger.warning(note)
        params.warnings.append(note)
    return params

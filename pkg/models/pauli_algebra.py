"""Multi-site Pauli strings and their action on state vectors.

Qubit order is fixed repo-wide: spin site j is bit j of the basis index
(site 0 least significant) and the ancilla, when attached, is the highest bit.
A string is stored as a power of i plus letters sorted by site; letters on
distinct sites commute, so sorting costs no phase.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from models.errors import DomainError, RegisterError
from models.lattice import PLAQUETTE_PATTERN, HoneycombLattice

PAULI_LETTERS = ("X", "Y", "Z")
PHASE_TEXT = {0: "+1", 1: "+i", 2: "-1", 3: "-i"}
_PHASE_PARSE = {"+1": 0, "1": 0, "+i": 1, "i": 1, "-1": 2, "-i": 3}
_TOKEN = re.compile(r"^([XYZ])(\d+)$")

# (left, right) -> (power of i, product letter or None for identity)
_PRODUCT = {
    ("X", "X"): (0, None), ("Y", "Y"): (0, None), ("Z", "Z"): (0, None),
    ("X", "Y"): (1, "Z"), ("Y", "Z"): (1, "X"), ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"), ("Z", "Y"): (3, "X"), ("X", "Z"): (3, "Y"),
}


@dataclass(frozen=True)
class PauliString:
    phase: int  # power of i, 0..3
    letters: Tuple[Tuple[int, str], ...]  # sorted by site, never identity

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_letters(cls, letters: Mapping[int, str], phase: int = 0) -> "PauliString":
        """Build from a site -> letter map; identity entries are dropped"""
        cleaned = []
        for site, letter in letters.items():
            letter = str(letter).upper()
            if letter == "I":
                continue
            if letter not in PAULI_LETTERS:
                raise DomainError("bad_pauli_text", f"{letter}{site}")
            cleaned.append((int(site), letter))
        return cls(phase=phase, letters=tuple(sorted(cleaned)))

    @classmethod
    def single(cls, site: int, axis: str) -> "PauliString":
        return cls.from_letters({site: axis})

    @classmethod
    def identity(cls) -> "PauliString":
        return cls(phase=0, letters=())

    @property
    def letter_map(self) -> Dict[int, str]:
        return dict(self.letters)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(site for site, _ in self.letters)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def masks(self) -> Tuple[int, int, int]:
        """(x_mask, z_mask, number of Y letters)"""
        x_mask = z_mask = n_y = 0
        for site, letter in self.letters:
            if letter in ("X", "Y"):
                x_mask |= 1 << site
            if letter in ("Z", "Y"):
                z_mask |= 1 << site
            if letter == "Y":
                n_y += 1
        return x_mask, z_mask, n_y

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(phase=phase, letters=self.letters)

    def dagger(self) -> "PauliString":
        return PauliString(phase=-self.phase, letters=self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        body = " ".join(f"{letter}{site}" for site, letter in self.letters)
        return f"{PHASE_TEXT[self.phase]} {body}".strip()

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse the text form, e.g. "+i X3 Y7 Z12" (a leading phase is optional)"""
        tokens = text.split()
        result = cls.identity()
        if tokens and tokens[0] in _PHASE_PARSE:
            result = result.with_phase(_PHASE_PARSE[tokens.pop(0)])
        for token in tokens:
            if token.upper() == "I":
                continue
            match = _TOKEN.match(token.upper())
            if match is None:
                raise DomainError("bad_pauli_text", text)
            result = multiply(result, cls.single(int(match.group(2)), match.group(1)))
        return result


@dataclass
class StateVector:
    amplitudes: np.ndarray
    n_spins: int
    n_ancilla: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        expected = 1 << (self.n_spins + self.n_ancilla)
        if self.amplitudes.shape != (expected,):
            raise RegisterError("register_mismatch", int(np.log2(max(len(self.amplitudes), 1))), self.n_spins)

    @property
    def n_qubits(self) -> int:
        return self.n_spins + self.n_ancilla

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_spins, self.n_ancilla)

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>"""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def check_norm(self, tol: float = 1e-12) -> "StateVector":
        drift = abs(self.norm() - 1.0)
        if drift > tol:
            raise RegisterError("norm_drift", drift)
        return self

    @classmethod
    def basis(cls, n_spins: int, index: int = 0, n_ancilla: int = 0) -> "StateVector":
        amplitudes = np.zeros(1 << (n_spins + n_ancilla), dtype=complex)
        amplitudes[index] = 1.0
        return cls(amplitudes, n_spins, n_ancilla)

    @classmethod
    def from_array(cls, vector: np.ndarray, n_spins: int, n_ancilla: int = 0) -> "StateVector":
        """Wrap and normalize a raw amplitude array"""
        vector = np.asarray(vector, dtype=complex)
        return cls(vector / np.linalg.norm(vector), n_spins, n_ancilla)

    @classmethod
    def random(cls, n_spins: int, rng: np.random.Generator, n_ancilla: int = 0) -> "StateVector":
        dim = 1 << (n_spins + n_ancilla)
        vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return cls.from_array(vector, n_spins, n_ancilla)


@lru_cache(maxsize=8)
def basis_indices(n_qubits: int) -> np.ndarray:
    """Cached arange over the computational basis"""
    indices = np.arange(1 << n_qubits, dtype=np.int64)
    indices.setflags(write=False)
    return indices


def bit_parity(indices: np.ndarray, mask: int) -> np.ndarray:
    """Parity of popcount(index & mask) for every index, as 0/1 int8"""
    parity = np.zeros(len(indices), dtype=np.int8)
    bit = 0
    while mask:
        if mask & 1:
            parity ^= ((indices >> bit) & 1).astype(np.int8)
        mask >>= 1
        bit += 1
    return parity


def pauli_coefficient(P: PauliString) -> complex:
    """Scalar prefactor i^(phase + #Y) of the X^x Z^z factorization"""
    _, _, n_y = P.masks
    return 1j ** ((P.phase + n_y) % 4)


def apply_masks(amplitudes: np.ndarray, x_mask: int, z_mask: int, coefficient: complex) -> np.ndarray:
    """coefficient * X^x_mask Z^z_mask applied by index permutation and sign flips"""
    indices = basis_indices(int(len(amplitudes)).bit_length() - 1)
    source = indices ^ x_mask
    signs = 1 - 2 * bit_parity(source, z_mask).astype(np.float64)
    return coefficient * signs * amplitudes[source]


def multiply(P: PauliString, Q: PauliString) -> PauliString:
    """P.Q with exact phase tracking"""
    phase = P.phase + Q.phase
    letters = dict(P.letters)
    for site, right in Q.letters:
        left = letters.pop(site, None)
        if left is None:
            letters[site] = right
            continue
        power, product = _PRODUCT[(left, right)]
        phase += power
        if product is not None:
            letters[site] = product
    return PauliString(phase=phase, letters=tuple(sorted(letters.items())))


def commutes(P: PauliString, Q: PauliString) -> bool:
    """True iff PQ = QP (even number of overlapping, differing letters)"""
    q_letters = dict(Q.letters)
    clashes = sum(1 for site, letter in P.letters if site in q_letters and q_letters[site] != letter)
    return clashes % 2 == 0


def _check_register(P: PauliString, psi: StateVector):
    for site in P.support:
        if site >= psi.n_spins:
            raise RegisterError("register_out_of_range", site, psi.n_spins)


def apply(P: PauliString, psi: StateVector) -> StateVector:
    """P|psi> on the spin register (identity on the ancilla)"""
    _check_register(P, psi)
    x_mask, z_mask, _ = P.masks
    amplitudes = apply_masks(psi.amplitudes, x_mask, z_mask, pauli_coefficient(P))
    return StateVector(amplitudes, psi.n_spins, psi.n_ancilla)


def expectation(P: PauliString, psi: StateVector) -> complex:
    """<psi|P|psi>"""
    return complex(np.vdot(psi.amplitudes, apply(P, psi).amplitudes))


def plaquette_operator(lattice: HoneycombLattice, p: int) -> PauliString:
    """W_p = X1 Y2 Z3 X4 Y5 Z6 over the plaquette walk"""
    plaquette = lattice.plaquette(p)
    return PauliString.from_letters(
        {site.index: link.value.upper() for site, link in zip(plaquette.sites, PLAQUETTE_PATTERN)}
    )


def product(strings: Iterable[PauliString]) -> PauliString:
    """Ordered product of several strings"""
    result = PauliString.identity()
    for string in strings:
        result = multiply(result, string)
    return result

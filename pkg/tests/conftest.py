from functools import reduce

import numpy as np
import pytest

from models.lattice import Boundary, build_lattice
from models.pauli_algebra import PauliString
from models.spin_ed import CouplingParams, build_hamiltonian, sector_ground

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(P: PauliString, n_qubits: int) -> np.ndarray:
    """Kronecker-product matrix of a Pauli string; qubit 0 is the least significant bit"""
    letters = P.letter_map
    factors = [PAULI_MATRICES[letters.get(q, "I")] for q in reversed(range(n_qubits))]
    return (1j ** P.phase) * reduce(np.kron, factors)


def flux_with_vortices(lattice, vortices):
    return [-1 if p in vortices else 1 for p in range(lattice.num_plaquettes)]


@pytest.fixture
def torus22():
    return build_lattice(2, 2, Boundary.TORUS)


@pytest.fixture
def torus33():
    return build_lattice(3, 3, Boundary.TORUS)


@pytest.fixture
def open22():
    return build_lattice(2, 2, Boundary.OPEN)


@pytest.fixture
def dimer():
    """Single z-link: the 1 x 1 open lattice"""
    return build_lattice(1, 1, Boundary.OPEN)


@pytest.fixture
def isotropic():
    return CouplingParams(Jx=1.0, Jy=1.0, Jz=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    import config

    monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path))
    return tmp_path


# four separated vortices on the 3 x 3 torus
QUARTET_VORTICES = (1, 3, 5, 6)


@pytest.fixture(scope="session")
def quartet33():
    """Lowest five states of the four-vortex sector, 3 x 3 torus, J = (1, 1, 1)"""
    lattice = build_lattice(3, 3, Boundary.TORUS)
    H = build_hamiltonian(lattice, CouplingParams(Jx=1.0, Jy=1.0, Jz=1.0))
    return lattice, sector_ground(H, lattice, flux_with_vortices(lattice, QUARTET_VORTICES), k=5)

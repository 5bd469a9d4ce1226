import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

__version__ = "1.0.0"

# Output Configuration
OUTPUT_DIR = os.getenv("KITAEV_LAB_OUTPUT_DIR", "output")
MANIFEST_SUFFIX = ".manifest.json"
FLOAT_DIGITS = 12  # significant digits in every numeric output
DEFAULT_SEED = 1234

# Exact Diagonalization Configuration
ED_MAX_SPINS = 20  # state vectors stay below 2^21 amplitudes with the ancilla
DENSE_MAX_SPINS = 12  # full eigh below this size, Lanczos above
LANCZOS_KRYLOV_DIM = 100
LANCZOS_MAX_RESTARTS = 60
RESIDUAL_TOL = 1e-8  # relative to the operator norm bound
DEGENERACY_TOL = 1e-6
MIXED_WP_THRESHOLD = 0.99
PENALTY_FACTOR = 10.0  # c = PENALTY_FACTOR * (|Jx|+|Jy|+|Jz|) * #plaquettes
PERTURBATIVE_RATIO = 0.1  # t/U above this is outside the superexchange regime

# Majorana Configuration
PAIRING_TOL = 1e-10
ZERO_MODE_TOL = 1e-9  # relative to max |A_jk|; smaller epsilons count as zero modes

# Braiding Configuration
PHASE_TOLERANCE = 0.2  # radians
COHERENCE_THRESHOLD = 0.2
LEAKAGE_LIMIT = 0.5
FACTORIZATION_TOL = 1e-12

# Batch Processing Configuration
BATCH_SIZE = 16  # sweep points scheduled per batch
MAX_CONCURRENT_WORKERS = 4

# CLI exit codes
EXIT_CODES = {
    "success": 0,
    "usage": 1,
    "resource": 2,
    "numeric": 3,
}

# Error Messages
ERROR_MESSAGES = {
    "lattice_too_small": "Torus extents must be >= 2 (got Lx={}, Ly={}); plaquettes would overlap themselves",
    "open_too_small": "Lattice extents must be >= 1 (got Lx={}, Ly={})",
    "unknown_boundary": "Unknown boundary condition: {}",
    "unknown_plaquette": "Unknown plaquette label {} (lattice has {} plaquettes)",
    "unknown_site": "Unknown site index {} (lattice has {} sites)",
    "bad_hexagon": "Sites {} do not form a closed hexagon of the lattice",
    "bad_pauli_text": "Cannot parse Pauli string: {}",
    "register_out_of_range": "Site {} is outside the {}-spin register",
    "register_mismatch": "State has {} spins but the lattice has {}",
    "norm_drift": "State norm drifted to {:.3e}",
    "too_many_spins": "Lattice has {} spins, above the ED ceiling of {}; use the Majorana solver (majorana module) for larger lattices",
    "bad_k": "Requested k={} eigenpairs from a space of dimension {}",
    "no_convergence": "Lanczos did not converge for eigenpair {} after {} restarts (residual {:.3e})",
    "couplings_invalid": "Couplings must be finite with at least one nonzero J (got {})",
    "flux_length": "Flux pattern has {} entries but the lattice has {} plaquettes",
    "flux_values": "Flux entries must be +1 or -1 (got {})",
    "flux_constraint": "Flux pattern violates the torus constraint: product of w_p must be +1",
    "field_sector": "Flux sectors are only defined at zero field (h={})",
    "sector_mismatch": "Sector state {} has W_p profile {} instead of the target",
    "bad_u": "Coupling ratio requires U > 0 (got {})",
    "bad_t": "Tunneling amplitudes must be non-negative (got {})",
    "odd_majoranas": "Majorana matrix must have even dimension (got {})",
    "not_skew": "Majorana matrix is not antisymmetric",
    "eig_failure": "Eigensolver failed: {}",
    "conjugation_identity": "Conjugation by Z{} disagrees with the two-bond identity (max deviation {:.3e})",
    "ancilla_present": "Ancilla already attached",
    "ancilla_missing": "Operation requires an attached ancilla",
    "script_order": "Protocol script must start with PrepareAncillaPlus and may only end with MeasureAncilla",
    "unknown_step": "Unknown protocol step: {}",
    "basis_not_orthonormal": "Ground basis is not orthonormal (defect {:.3e})",
    "inconclusive": "Coherence {:.3f} is below the threshold {:.3f}; statistics cannot be read",
    "missing_loop_count": "Discrimination needs reports for {} braid loops",
    "pattern_unmatched": "Phases {} match none of the statistics patterns",
    "bad_config": "Invalid configuration: {}",
}

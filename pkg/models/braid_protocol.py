"""Ancilla-controlled vortex creation, braid loop and interferometric read-out.

The ancilla is the highest qubit, so a joint state reshaped to (2, 2^n) has
row a equal to the spin state on ancilla branch a (times 1/sqrt 2 for an
equal-weight superposition). The loop operator on a hexagon numbered 1..6 is

    s23 = s^y_5 s^z_4 s^x_3 s^y_2 s^z_1 s^x_6

applied as six controlled gates, U_6^x first and U_5^y last.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

import config
from models.errors import (
    GeometryError,
    InconclusiveError,
    NumericError,
    ProtocolError,
    RegisterError,
)
from models.lattice import HoneycombLattice, LinkType, plaquette_sites
from models.pauli_algebra import PauliString, StateVector, apply, apply_masks, pauli_coefficient
from models.spin_ed import (
    CouplingParams,
    EigenResult,
    build_hamiltonian,
    ground_states,
    sector_ground,
    vortex_pair,
)

logger = logging.getLogger(__name__)

# letter applied at hexagon positions 1..6
LOOP_LETTERS = {1: "z", 2: "y", 3: "x", 4: "z", 5: "y", 6: "x"}
# gate order of s23, rightmost factor first
LOOP_ORDER = (6, 1, 2, 3, 4, 5)

# ancilla phase expected after n loops if the vortices braided as the
# non-Abelian R matrix predicts (defined up to an overall pi)
NON_ABELIAN_PREDICTION = {0: 0.0, 1: -math.pi / 2, 2: math.pi, 4: 0.0}


class HexagonNumbering(str, Enum):
    LOOP = "loop"  # letter at each position is the site's outward link, so s23 = W_p
    PLAQUETTE = "plaquette"  # positions follow the W_p walk


class Statistics(str, Enum):
    NON_ABELIAN = "NonAbelian-consistent"
    ABELIAN = "Abelian-consistent"
    TRIVIAL = "Trivial-consistent"


@dataclass(frozen=True)
class PrepareAncillaPlus:
    kind = "PrepareAncillaPlus"


@dataclass(frozen=True)
class ControlledPauli:
    site: int
    axis: str
    kind = "ControlledPauli"


@dataclass(frozen=True)
class UnconditionalPauli:
    site: int
    axis: str
    kind = "UnconditionalPauli"


@dataclass(frozen=True)
class BraidLoop:
    sites: Tuple[int, ...]  # hexagon positions 1..6
    kind = "BraidLoop"


@dataclass(frozen=True)
class MeasureAncilla:
    angle: float = 0.0
    kind = "MeasureAncilla"


Step = Union[PrepareAncillaPlus, ControlledPauli, UnconditionalPauli, BraidLoop, MeasureAncilla]
STEP_TYPES = {cls.kind: cls for cls in (PrepareAncillaPlus, ControlledPauli, UnconditionalPauli, BraidLoop, MeasureAncilla)}


def step_to_dict(step: Step) -> dict:
    payload = {"step": step.kind, **asdict(step)}
    if "sites" in payload:
        payload["sites"] = list(payload["sites"])
    return payload


def step_from_dict(payload: dict) -> Step:
    payload = dict(payload)
    kind = payload.pop("step", None)
    if kind not in STEP_TYPES:
        raise ProtocolError("unknown_step", kind)
    if "sites" in payload:
        payload["sites"] = tuple(int(s) for s in payload["sites"])
    if "axis" in payload:
        payload["axis"] = LinkType(payload["axis"]).value
    return STEP_TYPES[kind](**payload)


@dataclass
class ProtocolScript:
    steps: List[Step]

    def __post_init__(self):
        prepares = [i for i, s in enumerate(self.steps) if isinstance(s, PrepareAncillaPlus)]
        measures = [i for i, s in enumerate(self.steps) if isinstance(s, MeasureAncilla)]
        if prepares != [0] or any(i != len(self.steps) - 1 for i in measures):
            raise ProtocolError("script_order")

    @property
    def loop_count(self) -> int:
        return sum(isinstance(s, BraidLoop) for s in self.steps)

    def to_dict(self) -> dict:
        return {"steps": [step_to_dict(s) for s in self.steps]}

    @classmethod
    def from_dict(cls, payload: dict) -> "ProtocolScript":
        return cls([step_from_dict(s) for s in payload["steps"]])


@dataclass
class BraidMatrix:
    matrix: np.ndarray

    def __matmul__(self, other: "BraidMatrix") -> "BraidMatrix":
        return BraidMatrix(self.matrix @ other.matrix)

    def unitarity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(len(self.matrix))))


@dataclass
class BraidReport:
    rho_ancilla: np.ndarray
    coherence: float
    phase: float
    leakage: List[float]
    excitation_energies: List[float]
    loops: int
    script_echo: dict
    measurement: Optional[Dict[str, float]] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def abs_phase(self) -> float:
        return abs(self.phase)

    @property
    def diagnostics_ok(self) -> bool:
        return max(self.leakage) <= config.LEAKAGE_LIMIT

    def to_dict(self) -> dict:
        predicted = NON_ABELIAN_PREDICTION.get(self.loops)
        return {
            "loops": self.loops,
            "phase": self.phase,
            "abs_phase": self.abs_phase,
            "coherence": self.coherence,
            "rho_ancilla": {"real": self.rho_ancilla.real.tolist(), "imag": self.rho_ancilla.imag.tolist()},
            "leakage": list(self.leakage),
            "excitation_energies": list(self.excitation_energies),
            "diagnostics_ok": self.diagnostics_ok,
            "non_abelian_prediction": predicted,
            "deviation_from_prediction": None if predicted is None else angle_distance(self.phase, predicted),
            "measurement": self.measurement,
            "script": self.script_echo,
            "warnings": list(self.warnings),
        }


def angle_distance(a: float, b: float) -> float:
    """|a - b| on the circle"""
    return abs(math.remainder(a - b, 2 * math.pi))


def normalize_phase(phase: float) -> float:
    """Map into (-pi, pi]"""
    phase = math.remainder(phase, 2 * math.pi)
    return math.pi if phase <= -math.pi + 1e-12 else phase


def _require_ancilla(psi: StateVector):
    if psi.n_ancilla != 1:
        raise ProtocolError("ancilla_missing")


def attach_ancilla(psi: StateVector) -> StateVector:
    """|+>_a (x) psi with the ancilla as the highest qubit"""
    if psi.n_ancilla:
        raise ProtocolError("ancilla_present")
    amplitudes = np.concatenate([psi.amplitudes, psi.amplitudes]) / math.sqrt(2.0)
    return StateVector(amplitudes, psi.n_spins, n_ancilla=1)


def controlled_pauli(psi: StateVector, site: int, axis: str) -> StateVector:
    """|0><0| (x) I + |1><1| (x) s^axis_site"""
    _require_ancilla(psi)
    if not 0 <= site < psi.n_spins:
        raise RegisterError("register_out_of_range", site, psi.n_spins)
    P = PauliString.single(site, LinkType(axis).value)
    x_mask, z_mask, _ = P.masks
    branches = psi.amplitudes.reshape(2, -1)
    flipped = apply_masks(branches[1], x_mask, z_mask, pauli_coefficient(P))
    return StateVector(np.concatenate([branches[0], flipped]), psi.n_spins, psi.n_ancilla)


def unconditional_pauli(psi: StateVector, site: int, axis: str) -> StateVector:
    return apply(PauliString.single(site, LinkType(axis).value), psi)


def braid_hexagon(lattice: HoneycombLattice, p: int, numbering: HexagonNumbering = HexagonNumbering.LOOP) -> Tuple[int, ...]:
    """Sites of plaquette p in the 1..6 order used by the loop operator"""
    walk = [s.index for s in plaquette_sites(lattice, p)]
    if HexagonNumbering(numbering) == HexagonNumbering.LOOP:
        return (walk[2], walk[1], walk[0], walk[5], walk[4], walk[3])
    return tuple(walk)


def loop_string(sites: Sequence[int]) -> PauliString:
    """s23 as a single Pauli string"""
    return PauliString.from_letters({site: LOOP_LETTERS[k + 1] for k, site in enumerate(sites)})


def braid_loop(psi: StateVector, sites: Sequence[int], lattice: HoneycombLattice) -> StateVector:
    """Six controlled Paulis around the hexagon, U_6^x first and U_5^y last"""
    sites = tuple(int(s) for s in sites)
    lattice.find_plaquette(sites)
    for position in LOOP_ORDER:
        psi = controlled_pauli(psi, sites[position - 1], LOOP_LETTERS[position])
    return psi


def _creation_site(lattice: HoneycombLattice, avoid: Sequence[int], exclude: Sequence[int]) -> int:
    # first site whose z-kick leaves the braid plaquettes alone
    candidates = [s for s in range(lattice.num_sites) if s not in exclude]
    for site in candidates:
        if not set(vortex_pair(lattice, site, "z")) & set(avoid):
            return site
    for site in candidates:
        if avoid[0] not in vortex_pair(lattice, site, "z"):
            return site
    raise GeometryError("bad_hexagon", list(avoid))


def default_script(
    lattice: HoneycombLattice,
    loops: int = 1,
    braid_plaquette: Optional[int] = None,
    creation_site: Optional[int] = None,
    numbering: HexagonNumbering = HexagonNumbering.LOOP,
    measure_angle: Optional[float] = None,
) -> ProtocolScript:
    """Create vortices 1, 2 unconditionally and 3, 4 on the |1> branch, loop, then undo both"""
    p = lattice.num_plaquettes // 2 if braid_plaquette is None else braid_plaquette
    hexagon = braid_hexagon(lattice, p, numbering)
    site6 = hexagon[5]
    conditional = vortex_pair(lattice, site6, "z")
    if creation_site is None:
        creation_site = _creation_site(lattice, [p] + [q for q in conditional if q != p], [site6])
    steps: List[Step] = [
        PrepareAncillaPlus(),
        UnconditionalPauli(creation_site, "z"),
        ControlledPauli(site6, "z"),
    ]
    steps += [BraidLoop(hexagon)] * loops
    steps += [ControlledPauli(site6, "z"), UnconditionalPauli(creation_site, "z")]
    if measure_angle is not None:
        steps.append(MeasureAncilla(measure_angle))
    return ProtocolScript(steps)


def inverse_steps(script: ProtocolScript) -> List[Step]:
    """Gate steps of the script in reverse order; every gate here is its own inverse"""
    return [s for s in reversed(script.steps) if not isinstance(s, (PrepareAncillaPlus, MeasureAncilla))]


def apply_step(psi: StateVector, step: Step, lattice: HoneycombLattice) -> StateVector:
    if isinstance(step, PrepareAncillaPlus):
        return attach_ancilla(psi)
    if isinstance(step, ControlledPauli):
        return controlled_pauli(psi, step.site, step.axis)
    if isinstance(step, UnconditionalPauli):
        return unconditional_pauli(psi, step.site, step.axis)
    if isinstance(step, BraidLoop):
        return braid_loop(psi, step.sites, lattice)
    if isinstance(step, MeasureAncilla):
        return psi
    raise ProtocolError("unknown_step", step)


def run_steps(psi: StateVector, steps: Sequence[Step], lattice: HoneycombLattice) -> StateVector:
    """Execute steps in order, checking that the norm never drifts"""
    for step in steps:
        psi = apply_step(psi, step, lattice)
        psi.check_norm(1e-12)
    return psi


def ancilla_density_matrix(psi: StateVector) -> np.ndarray:
    """rho[a, b] = <a| Tr_spins |psi><psi| |b>"""
    _require_ancilla(psi)
    branches = psi.amplitudes.reshape(2, -1)
    return branches @ branches.conj().T


def branch_states(psi: StateVector) -> Tuple[StateVector, StateVector]:
    """(psi_0, psi_1) with psi = (|0> psi_0 + |1> psi_1) / sqrt 2"""
    _require_ancilla(psi)
    branches = psi.amplitudes.reshape(2, -1) * math.sqrt(2.0)
    return StateVector(branches[0], psi.n_spins), StateVector(branches[1], psi.n_spins)


def _check_factorization(rho: np.ndarray, psi0: StateVector, psi1: StateVector):
    reconstructed = 0.5 * np.array([
        [psi0.overlap(psi0), psi1.overlap(psi0)],
        [psi0.overlap(psi1), psi1.overlap(psi1)],
    ])
    deviation = max(abs(psi0.norm() - 1.0), abs(psi1.norm() - 1.0), float(np.abs(rho - reconstructed).max()))
    if deviation > config.FACTORIZATION_TOL:
        raise NumericError("norm_drift", deviation)


def protocol_ground_state(lattice: HoneycombLattice, params: CouplingParams, seed: int = config.DEFAULT_SEED) -> EigenResult:
    """Starting state: vortex-free sector ground state at h = 0, plain ground state otherwise"""
    H = build_hamiltonian(lattice, params)
    if params.has_field:
        return ground_states(H, 1, seed=seed)
    return sector_ground(H, lattice, [1] * lattice.num_plaquettes, 1, seed=seed)


def run_protocol(
    lattice: HoneycombLattice,
    params: CouplingParams,
    script: ProtocolScript,
    ground: Optional[EigenResult] = None,
    seed: int = config.DEFAULT_SEED,
) -> BraidReport:
    """Run a script from the ground state and read the ancilla out"""
    if ground is None:
        ground = protocol_ground_state(lattice, params, seed)
    gs = ground.ground_state
    psi = run_steps(gs, script.steps, lattice)

    rho = ancilla_density_matrix(psi)
    psi0, psi1 = branch_states(psi)
    _check_factorization(rho, psi0, psi1)
    off_diagonal = rho[1, 0]

    H = build_hamiltonian(lattice, params)
    leakage, energies = [], []
    for branch in (psi0, psi1):
        leakage.append(max(0.0, float(1.0 - abs(gs.overlap(branch)) ** 2)))
        energies.append(float(np.vdot(branch.amplitudes, H.matvec(branch.amplitudes)).real) - ground.ground_energy)

    measurement = None
    final = script.steps[-1]
    if isinstance(final, MeasureAncilla):
        theta = final.angle
        p_plus = 0.5 * (rho[0, 0] + rho[1, 1] + np.exp(1j * theta) * rho[0, 1] + np.exp(-1j * theta) * rho[1, 0])
        measurement = {"angle": theta, "p_plus": float(p_plus.real)}

    report = BraidReport(
        rho_ancilla=rho,
        coherence=float(abs(off_diagonal)),
        phase=normalize_phase(float(np.angle(off_diagonal))),
        leakage=leakage,
        excitation_energies=energies,
        loops=script.loop_count,
        script_echo=script.to_dict(),
        measurement=measurement,
    )
    if not report.diagnostics_ok:
        note = f"branch leakage {max(leakage):.3f} exceeds {config.LEAKAGE_LIMIT}"
        logger.warning(note)
        report.warnings.append(note)
    logger.info("loops=%d phase=%.6f coherence=%.6f", report.loops, report.phase, report.coherence)
    return report


@dataclass
class ProjectedBraid:
    matrix: np.ndarray
    unitarity_defect: float

    @property
    def off_diagonal_weight(self) -> float:
        """||M - diag M|| / ||M||, 0 for a diagonal M"""
        norm = float(np.linalg.norm(self.matrix))
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(self.matrix - np.diag(np.diag(self.matrix)))) / norm

    @property
    def vacuum_overlap(self) -> float:
        """|<basis_0| string |basis_0>|"""
        return float(abs(self.matrix[0, 0]))


def projected_braid(ground_basis: Sequence[StateVector], string: PauliString) -> ProjectedBraid:
    """M_ab = <basis_a| string |basis_b> with its unitarity defect ||M^dag M - I||"""
    vectors = np.array([v.amplitudes for v in ground_basis])
    gram = vectors.conj() @ vectors.T
    defect = float(np.linalg.norm(gram - np.eye(len(ground_basis))))
    if defect > 1e-8:
        raise NumericError("basis_not_orthonormal", defect)
    images = np.array([apply(string, v).amplitudes for v in ground_basis])
    M = vectors.conj() @ images.T
    return ProjectedBraid(matrix=M, unitarity_defect=float(np.linalg.norm(M.conj().T @ M - np.eye(len(M)))))


_S = math.sqrt(0.5)
_COS = (1.0, _S, 0.0, -_S, -1.0, -_S, 0.0, _S)
_SIN = (0.0, _S, 1.0, _S, 0.0, -_S, -1.0, -_S)


def reference_braid_matrix(n: int) -> BraidMatrix:
    """R^n with R = (1/sqrt 2) [[1, -i], [-i, 1]], i.e. cos(n pi/4) I - i sin(n pi/4) s^x"""
    k = n % 8
    c, s = _COS[k], _SIN[k]
    return BraidMatrix(np.array([[c, -1j * s], [-1j * s, c]], dtype=complex))


def _single_qubit(angles: np.ndarray) -> np.ndarray:
    theta, phi, lam = angles
    return np.array([
        [math.cos(theta / 2), -np.exp(1j * lam) * math.sin(theta / 2)],
        [np.exp(1j * phi) * math.sin(theta / 2), np.exp(1j * (phi + lam)) * math.cos(theta / 2)],
    ])


def align_to_reference(M: np.ndarray, n: int, seed: int = config.DEFAULT_SEED, starts: int = 8) -> Tuple[float, np.ndarray]:
    """Best |tr(M^dag V K V^dag)| / d over basis changes V, K = R^n (x I for a quartet).

    Returns (fidelity in [0, 1], fitted V).
    """
    R = reference_braid_matrix(n).matrix
    d = len(M)
    K = R if d == 2 else np.kron(R, np.eye(d // 2))

    def basis_change(x):
        V = _single_qubit(x[:3])
        return V if d == 2 else np.kron(V, _single_qubit(x[3:]))

    def loss(x):
        V = basis_change(x)
        return -abs(np.trace(M.conj().T @ V @ K @ V.conj().T)) / d

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(starts):
        result = minimize(loss, rng.uniform(0, 2 * math.pi, 3 if d == 2 else 6), method="Nelder-Mead",
                          options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000})
        if best is None or result.fun < best.fun:
            best = result
    return float(-best.fun), basis_change(best.x)


def classify_phases(phase_one: float, phase_two: float, tolerance: float = config.PHASE_TOLERANCE) -> Statistics:
    """Statistics pattern of the ancilla phases after one and two loops"""
    if angle_distance(abs(phase_one), math.pi / 2) <= tolerance:
        return Statistics.NON_ABELIAN
    if angle_distance(phase_one, math.pi) <= tolerance and angle_distance(phase_two, 0.0) <= tolerance:
        return Statistics.ABELIAN
    if angle_distance(phase_one, 0.0) <= tolerance and angle_distance(phase_two, 0.0) <= tolerance:
        return Statistics.TRIVIAL
    raise InconclusiveError("pattern_unmatched", [round(phase_one, 6), round(phase_two, 6)])


def statistics_discriminator(
    reports: Sequence[BraidReport],
    tolerance: float = config.PHASE_TOLERANCE,
    coherence_threshold: float = config.COHERENCE_THRESHOLD,
) -> Statistics:
    """Classify braiding statistics from reports with one and two loops"""
    by_loops = {r.loops: r for r in reports}
    for needed in (1, 2):
        if needed not in by_loops:
            raise InconclusiveError("missing_loop_count", needed)
    for report in reports:
        if report.coherence < coherence_threshold:
            raise InconclusiveError("inconclusive", report.coherence, coherence_threshold)
    return classify_phases(by_loops[1].phase, by_loops[2].phase, tolerance)

import json
import math

import numpy as np
import pytest

from models.braid_protocol import (
    BraidLoop,
    BraidReport,
    ControlledPauli,
    HexagonNumbering,
    MeasureAncilla,
    PrepareAncillaPlus,
    ProtocolScript,
    Statistics,
    UnconditionalPauli,
    _single_qubit,
    align_to_reference,
    ancilla_density_matrix,
    attach_ancilla,
    braid_hexagon,
    braid_loop,
    classify_phases,
    controlled_pauli,
    default_script,
    inverse_steps,
    loop_string,
    projected_braid,
    protocol_ground_state,
    reference_braid_matrix,
    run_protocol,
    run_steps,
    statistics_discriminator,
    step_from_dict,
)
from models.errors import GeometryError, InconclusiveError, NumericError, ProtocolError, RegisterError
from models.lattice import plaquette_sites
from models.pauli_algebra import PauliString, StateVector, apply, plaquette_operator
from models.spin_ed import vortex_pair


@pytest.fixture
def ground22(torus22, isotropic):
    return protocol_ground_state(torus22, isotropic)


def make_report(loops, phase, coherence=0.5):
    return BraidReport(
        rho_ancilla=np.eye(2) / 2,
        coherence=coherence,
        phase=phase,
        leakage=[0.0, 0.0],
        excitation_energies=[0.0, 0.0],
        loops=loops,
        script_echo={},
    )


class TestAncillaGates:
    def test_attach_puts_both_branches_in_psi(self, rng):
        psi = StateVector.random(3, rng)
        joint = attach_ancilla(psi)
        assert joint.n_ancilla == 1
        np.testing.assert_allclose(ancilla_density_matrix(joint), np.full((2, 2), 0.5), atol=1e-14)

    def test_attach_twice(self, rng):
        with pytest.raises(ProtocolError):
            attach_ancilla(attach_ancilla(StateVector.random(2, rng)))

    def test_controlled_gate_acts_on_one_branch(self, rng):
        psi = StateVector.random(3, rng)
        branches = controlled_pauli(attach_ancilla(psi), 1, "y").amplitudes.reshape(2, -1) * math.sqrt(2)
        np.testing.assert_allclose(branches[0], psi.amplitudes, atol=1e-14)
        np.testing.assert_allclose(branches[1], apply(PauliString.single(1, "y"), psi).amplitudes, atol=1e-14)

    def test_controlled_gate_needs_ancilla(self, rng):
        with pytest.raises(ProtocolError):
            controlled_pauli(StateVector.random(3, rng), 0, "z")

    def test_controlled_gate_site_range(self, rng):
        with pytest.raises(RegisterError):
            controlled_pauli(attach_ancilla(StateVector.random(3, rng)), 3, "z")


class TestBraidLoop:
    def test_loop_numbering_reproduces_plaquette_operator(self, torus33):
        for p in range(torus33.num_plaquettes):
            string = loop_string(braid_hexagon(torus33, p))
            W = plaquette_operator(torus33, p)
            assert string.letter_map == W.letter_map and string.phase == W.phase

    def test_plaquette_numbering_follows_walk(self, torus22):
        walk = tuple(s.index for s in plaquette_sites(torus22, 1))
        assert braid_hexagon(torus22, 1, HexagonNumbering.PLAQUETTE) == walk

    def test_gates_equal_controlled_loop_string(self, torus22, rng):
        psi = StateVector.random(8, rng)
        hexagon = braid_hexagon(torus22, 2)
        branches = braid_loop(attach_ancilla(psi), hexagon, torus22).amplitudes.reshape(2, -1) * math.sqrt(2)
        np.testing.assert_allclose(branches[0], psi.amplitudes, atol=1e-13)
        np.testing.assert_allclose(branches[1], apply(loop_string(hexagon), psi).amplitudes, atol=1e-13)

    def test_rejects_non_hexagon(self, torus33, rng):
        with pytest.raises(GeometryError):
            braid_loop(attach_ancilla(StateVector.random(18, rng)), (0, 1, 2, 3, 4, 5), torus33)


class TestScripts:
    def test_default_layout(self, torus22):
        script = default_script(torus22, loops=2, measure_angle=0.0)
        kinds = [type(s) for s in script.steps]
        assert kinds == [
            PrepareAncillaPlus, UnconditionalPauli, ControlledPauli, BraidLoop, BraidLoop,
            ControlledPauli, UnconditionalPauli, MeasureAncilla,
        ]
        assert script.loop_count == 2
        assert script.steps[2].site == script.steps[3].sites[5]

    def test_creation_avoids_the_braid_plaquette(self, torus33):
        script = default_script(torus33, loops=1, braid_plaquette=4)
        assert 4 not in vortex_pair(torus33, script.steps[1].site, "z")

    @pytest.mark.parametrize("steps", [
        [ControlledPauli(0, "z")],
        [PrepareAncillaPlus(), PrepareAncillaPlus()],
        [PrepareAncillaPlus(), MeasureAncilla(), ControlledPauli(0, "z")],
    ])
    def test_order_is_enforced(self, steps):
        with pytest.raises(ProtocolError):
            ProtocolScript(steps)

    def test_json_form(self, torus22):
        script = default_script(torus22, loops=1, measure_angle=0.5)
        payload = json.loads(json.dumps(script.to_dict()))
        assert payload["steps"][0] == {"step": "PrepareAncillaPlus"}
        assert payload["steps"][3]["step"] == "BraidLoop" and len(payload["steps"][3]["sites"]) == 6
        assert ProtocolScript.from_dict(payload) == script

    def test_unknown_step(self):
        with pytest.raises(ProtocolError):
            step_from_dict({"step": "Teleport"})


class TestProtocol:
    @pytest.mark.parametrize("loops, phase", [(0, 0.0), (1, math.pi), (2, 0.0)])
    def test_ancilla_phase(self, torus22, isotropic, ground22, loops, phase):
        report = run_protocol(torus22, isotropic, default_script(torus22, loops=loops), ground=ground22)
        assert report.loops == loops
        assert report.coherence == pytest.approx(0.5, abs=1e-8)
        assert abs(math.remainder(report.abs_phase - phase, 2 * math.pi)) < 1e-6
        assert max(report.leakage) == pytest.approx(0.0, abs=1e-8)
        assert all(math.copysign(1.0, value) == 1.0 for value in report.leakage)
        assert report.diagnostics_ok

    def test_zero_loops_cancel_exactly(self, torus22, isotropic, ground22):
        report = run_protocol(torus22, isotropic, default_script(torus22, loops=0), ground=ground22)
        assert report.phase == pytest.approx(0.0, abs=1e-10)
        assert report.coherence == pytest.approx(0.5, abs=1e-10)
        assert report.leakage == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_prediction_in_report(self, torus22, isotropic, ground22):
        payload = run_protocol(torus22, isotropic, default_script(torus22, loops=1), ground=ground22).to_dict()
        assert payload["non_abelian_prediction"] == pytest.approx(-math.pi / 2)
        assert payload["deviation_from_prediction"] == pytest.approx(math.pi / 2, abs=1e-6)

    @pytest.mark.parametrize("loops, p_plus", [(0, 1.0), (1, 0.0), (2, 1.0)])
    def test_measurement(self, torus22, isotropic, ground22, loops, p_plus):
        script = default_script(torus22, loops=loops, measure_angle=0.0)
        report = run_protocol(torus22, isotropic, script, ground=ground22)
        assert report.measurement["p_plus"] == pytest.approx(p_plus, abs=1e-8)

    def test_reversal_restores_the_start(self, torus22, ground22):
        script = default_script(torus22, loops=3)
        gs = ground22.ground_state
        forward = run_steps(gs, script.steps, torus22)
        back = run_steps(forward, inverse_steps(script), torus22)
        np.testing.assert_allclose(back.amplitudes, attach_ancilla(gs).amplitudes, atol=1e-12)

    def test_discriminator_on_torus(self, torus22, isotropic, ground22):
        reports = [run_protocol(torus22, isotropic, default_script(torus22, loops=n), ground=ground22) for n in (1, 2)]
        assert statistics_discriminator(reports) == Statistics.ABELIAN


class TestReferenceBraid:
    def test_unitary_and_periodic(self):
        R = reference_braid_matrix(1)
        assert R.unitarity_defect() < 1e-14
        np.testing.assert_array_equal(reference_braid_matrix(8).matrix, np.eye(2))
        np.testing.assert_allclose((R @ R).matrix, reference_braid_matrix(2).matrix, atol=1e-15)

    @pytest.mark.parametrize("n", range(-4, 9))
    def test_inverse(self, n):
        product = (reference_braid_matrix(n) @ reference_braid_matrix(-n)).matrix
        np.testing.assert_allclose(product, np.eye(2), atol=1e-15)

    def test_two_braids_give_minus_i_sigma_x(self):
        np.testing.assert_allclose(reference_braid_matrix(2).matrix, -1j * np.array([[0, 1], [1, 0]]), atol=1e-15)


class TestProjection:
    def test_projected_pauli(self):
        basis = [StateVector.basis(2, 0), StateVector.basis(2, 1)]
        result = projected_braid(basis, PauliString.parse("X0"))
        np.testing.assert_allclose(result.matrix, [[0, 1], [1, 0]], atol=1e-14)
        assert result.unitarity_defect == pytest.approx(0.0, abs=1e-14)
        assert result.off_diagonal_weight == pytest.approx(1.0)
        assert result.vacuum_overlap == pytest.approx(0.0, abs=1e-14)

    def test_basis_must_be_orthonormal(self):
        skewed = StateVector.from_array(np.array([1.0, 1.0, 0.0, 0.0]), 2)
        with pytest.raises(NumericError):
            projected_braid([StateVector.basis(2, 0), skewed], PauliString.parse("X0"))

    def test_alignment_recovers_rotated_reference(self):
        V = _single_qubit(np.array([0.7, 1.9, -0.4]))
        M = V @ reference_braid_matrix(1).matrix @ V.conj().T
        fidelity, _ = align_to_reference(M, 1)
        assert fidelity == pytest.approx(1.0, abs=1e-6)

    def test_identity_aligns_poorly(self):
        fidelity, _ = align_to_reference(np.eye(2, dtype=complex), 1)
        assert fidelity == pytest.approx(math.sqrt(0.5), abs=1e-6)


class TestClassification:
    @pytest.mark.parametrize("one, two, expected", [
        (math.pi / 2, math.pi, Statistics.NON_ABELIAN),
        (-math.pi / 2, math.pi, Statistics.NON_ABELIAN),
        (math.pi, 0.0, Statistics.ABELIAN),
        (-math.pi + 0.05, 0.05, Statistics.ABELIAN),
        (0.0, 0.0, Statistics.TRIVIAL),
    ])
    def test_patterns(self, one, two, expected):
        assert classify_phases(one, two) == expected

    def test_unmatched(self):
        with pytest.raises(InconclusiveError):
            classify_phases(1.0, 0.0)

    def test_needs_both_loop_counts(self):
        with pytest.raises(InconclusiveError):
            statistics_discriminator([make_report(1, math.pi)])

    def test_low_coherence(self):
        with pytest.raises(InconclusiveError):
            statistics_discriminator([make_report(1, math.pi, 0.05), make_report(2, 0.0)])


@pytest.mark.slow
def test_single_loop_on_three_by_three(torus33, isotropic):
    report = run_protocol(torus33, isotropic, default_script(torus33, loops=1))
    assert report.abs_phase == pytest.approx(math.pi, abs=1e-6)
    assert report.coherence == pytest.approx(0.5, abs=1e-6)


@pytest.mark.slow
class TestQuartetProjection:
    @pytest.mark.parametrize("numbering", list(HexagonNumbering))
    def test_loop_string_on_the_quartet(self, quartet33, numbering):
        lattice, result = quartet33
        p = lattice.num_plaquettes // 2
        projected = projected_braid(result.eigenvectors[:4], loop_string(braid_hexagon(lattice, p, numbering)))
        fidelity, _ = align_to_reference(projected.matrix, 2)
        print(
            f"{numbering.value}: defect={projected.unitarity_defect:.4f} "
            f"off-diagonal={projected.off_diagonal_weight:.4f} vacuum={projected.vacuum_overlap:.4f} "
            f"fidelity={fidelity:.4f}"
        )
        np.testing.assert_allclose(projected.matrix, projected.matrix.conj().T, atol=1e-8)
        if numbering == HexagonNumbering.LOOP:
            # the string is W_p itself, a constant on the sector
            np.testing.assert_allclose(projected.matrix, np.eye(4), atol=1e-8)
            assert projected.unitarity_defect < 1e-8
            assert projected.off_diagonal_weight < 1e-8
            assert projected.vacuum_overlap == pytest.approx(1.0, abs=1e-8)
            assert fidelity == pytest.approx(0.0, abs=1e-6)
        else:
            # walk order differs from W_p by two y-link terms, which leave the quartet
            assert projected.unitarity_defect > 0.1

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fegkp import electron as el
from fegkp.errors import DegenerateBranchError, InputError
from fegkp.linalg import StateVector, fidelity, kron_states

PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
# frozen regression values: comb PINEM fidelity to R_x(theta)|0> at sigma = 2, 4, 8
PINEM_BASELINE = {math.pi / 2: [0.94284, 0.98469, 0.99611], math.pi: [0.86505, 0.96763, 0.99211]}


def _qubit_spec(sigma):
    return el.CombSpec(el.qubit_ring_size(sigma), sigma, 0.0, 2)


# --- combs --------------------------------------------------------------------

def test_comb_spec_validation():
    with pytest.raises(InputError):
        el.CombSpec(8, 0.5)
    with pytest.raises(InputError):
        el.CombSpec(17, 4)  # needs 33 sites
    with pytest.raises(InputError):
        el.CombSpec(33, 4, spacing=3)
    with pytest.raises(InputError):
        el.CombSpec(33, -1)


def test_single_tooth_sentinel():
    amps = el.comb_amplitudes(el.CombSpec(5, 0))
    np.testing.assert_array_equal(amps, [0, 0, 1, 0, 0])


def test_gaussian_envelope_ratio():
    spec = el.CombSpec(33, 4)
    amps = el.comb_amplitudes(spec)
    centre = 16
    assert amps[centre + 4] / amps[centre] == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert np.linalg.norm(amps) == pytest.approx(1.0, abs=1e-12)


def test_comb_phase_and_spacing():
    spec = el.CombSpec(35, 4, phi=0.3, spacing=2)
    amps = el.comb_amplitudes(spec)
    n = spec.indices
    assert not amps[n % 2 == 1].any()
    assert np.angle(amps[n == 2][0] / amps[n == 0][0]) == pytest.approx(0.6)


def test_wide_comb_is_ladder_eigenstate():
    spec = el.CombSpec(67, 8)
    psi = el.comb_amplitudes(spec)
    overlap = np.vdot(psi, el.ladder_array(67) @ psi)
    assert abs(overlap) >= 0.99
    assert abs(overlap) == pytest.approx(0.99610, abs=1e-5)


def test_qubit_ring_size():
    for sigma in (0.5, 2, 4, 8, 8.3):
        m = el.qubit_ring_size(sigma)
        assert m % 4 == 3 and m >= 8 * sigma + 1 and m - 4 < 8 * sigma + 1


# --- ladder -------------------------------------------------------------------

def test_periodic_ladder_cycle():
    b = el.ladder_array(3)
    np.testing.assert_array_equal(b @ b @ b, np.eye(3))


def test_periodic_ladder_commutes():
    b = el.ladder(7).data
    assert not (b @ b.conj().T - b.conj().T @ b).any()
    assert el.ladder(7).is_unitary(0.0)


def test_truncated_ladder_edges():
    b = el.ladder_array(7, "truncated")
    comm = b @ b.T - b.T @ b
    nz = np.argwhere(comm != 0)
    assert len(nz) == 2
    assert sorted(abs(comm[tuple(i)]) for i in nz) == [1, 1]
    assert not np.linalg.matrix_power(b, 7).any()


def test_ladder_eigenvalues():
    b = el.ladder_array(9)
    w = np.linalg.eigvals(b)
    lam = el.ladder_eigenvalues(9)
    assert np.abs(np.sort_complex(np.round(w, 12)) - np.sort_complex(np.round(lam, 12))).max() < 1e-10


def test_unknown_boundary():
    with pytest.raises(InputError):
        el.ladder_array(5, "open")


# --- comb qubit ---------------------------------------------------------------

@pytest.mark.parametrize("sigma", [1, 2, 4, 8])
def test_qubit_states_orthogonal(sigma):
    zero, one = el.qubit_states(_qubit_spec(sigma))
    assert np.vdot(zero.amps, one.amps) == 0
    assert np.vdot(zero.amps, el.ladder_array(zero.dims[0]) @ zero.amps) == 0
    assert fidelity(StateVector(zero.dims, el.ladder_array(zero.dims[0]) @ zero.amps), one) == pytest.approx(1.0)


def test_qubit_states_need_spacing_two():
    with pytest.raises(InputError):
        el.qubit_states(el.CombSpec(35, 4))


def test_qubit_states_need_ring_three_mod_four():
    with pytest.raises(InputError):
        el.qubit_states(el.CombSpec(37, 4, spacing=2))


def test_embed_qubit():
    spec = _qubit_spec(4)
    zero, one = el.qubit_states(spec)
    psi = el.embed_qubit(spec, PLUS)
    np.testing.assert_allclose(psi.amps, (zero.amps + one.amps) / math.sqrt(2))
    assert psi.is_normalized()


# --- gates --------------------------------------------------------------------

def test_rotation_identity_and_axes():
    np.testing.assert_array_equal(el.rotation_array("X", 0), np.eye(2))
    with pytest.raises(InputError):
        el.rotation_array("Y", 1.0)


def test_hadamard_maps_zero_to_plus():
    out = el.hadamard_array() @ np.array([1, 0])
    assert abs(np.vdot(PLUS, out)) ** 2 == pytest.approx(1.0, abs=1e-12)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    np.testing.assert_allclose(el.hadamard_array(), h, atol=1e-15)


def test_rz_rx_is_y():
    prod = el.rotation_array("Z", math.pi) @ el.rotation_array("X", math.pi)
    y = np.array([[0, -1j], [1j, 0]])
    phase = prod[1, 0] / y[1, 0]
    np.testing.assert_allclose(prod, phase * y, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["X", "Z", "H"]), st.floats(-10, 10))
def test_qubit_gates_unitary(axis, angle):
    u = el.gate_array(axis, angle)
    assert np.abs(u.conj().T @ u - np.eye(2)).max() <= 1e-12


def _pinem_fidelity(sigma, theta):
    spec = _qubit_spec(sigma)
    zero, one = el.qubit_states(spec)
    got = el.comb_pinem(spec.ring_size, theta).data @ zero.amps
    ideal = el.rotation_array("X", theta) @ np.array([1, 0])
    want = ideal[0] * zero.amps + ideal[1] * one.amps
    return abs(np.vdot(want, got)) ** 2


@pytest.mark.parametrize("theta", sorted(PINEM_BASELINE))
def test_comb_pinem_converges_to_rx(theta):
    fids = [_pinem_fidelity(s, theta) for s in (2, 4, 8)]
    assert fids == sorted(fids)
    np.testing.assert_allclose(fids, PINEM_BASELINE[theta], atol=1e-5)


@pytest.mark.parametrize("quarter", [1, 2, 3])
def test_comb_drift_is_rz_at_quarter_turns(quarter):
    theta = quarter * math.pi / 2
    spec = _qubit_spec(4)
    zero, one = el.qubit_states(spec)
    start = (zero.amps + one.amps) / math.sqrt(2)
    got = el.comb_drift(spec.ring_size, theta).data @ start
    ideal = el.rotation_array("Z", theta) @ PLUS
    want = ideal[0] * zero.amps + ideal[1] * one.amps
    assert abs(np.vdot(want, got)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_comb_gates_are_unitary():
    assert el.comb_pinem(19, 1.1).is_unitary(1e-12)
    assert el.comb_drift(19, 0.4).is_unitary(1e-12)


# --- measurement --------------------------------------------------------------

def _joint(e_amps, photon):
    return kron_states(StateVector((2,), e_amps), photon)


def test_measure_plus_at_phi_zero():
    photon = StateVector((3,), np.array([0.6, 0.8j, 0]))
    b = el.measure_electron(_joint(PLUS, photon), 0.0)
    assert [x.outcome for x in b] == ["+", "-"]
    assert b[0].probability == pytest.approx(1.0, abs=1e-15)
    assert b[1].state is None
    assert fidelity(b[0].state, photon) == pytest.approx(1.0)


def test_measure_zero_at_phi_zero():
    photon = StateVector.basis((3,), 1)
    b = el.measure_electron(_joint(np.array([1, 0]), photon), 0.0)
    assert [x.probability for x in b] == pytest.approx([0.5, 0.5])


def test_measure_z_basis_labels():
    photon = StateVector.basis((2,), 0)
    b = el.measure_electron(_joint(np.array([0, 1]), photon), "Z")
    assert [x.outcome for x in b] == ["0", "1"]
    assert b[1].probability == pytest.approx(1.0)


def test_measure_branch_and_sampling():
    photon = StateVector.basis((2,), 0)
    joint = _joint(PLUS, photon)
    with pytest.raises(DegenerateBranchError):
        el.measure_electron(joint, 0.0, branch="-")
    assert el.measure_electron(joint, 0.0, branch="+").probability == pytest.approx(1.0)
    with pytest.raises(InputError):
        el.measure_electron(joint, 0.0, branch="0")
    j2 = _joint(np.array([1, 0]), photon)
    draws = [el.measure_electron(j2, "Z", rng=np.random.default_rng(s)).outcome for s in range(4)]
    again = [el.measure_electron(j2, "Z", rng=np.random.default_rng(s)).outcome for s in range(4)]
    assert draws == again == ["0"] * 4


def test_measure_rejects_bad_input():
    with pytest.raises(InputError):
        el.measure_electron(StateVector.basis((3, 2), 0), 0.0)
    with pytest.raises(InputError):
        el.basis_bras("Y")
    with pytest.raises(InputError):
        el.project_electron(np.zeros((2, 3)), "Z")


def test_phi_basis_is_orthonormal():
    for phi in (0.0, 0.7, math.pi / 4, -2.0):
        _, bras = el.basis_bras(phi)
        np.testing.assert_allclose(bras @ bras.conj().T, np.eye(2), atol=1e-15)


def test_branch_probabilities_sum_to_one():
    rng = np.random.default_rng(11)
    for _ in range(200):
        v = rng.normal(size=(2, 5)) + 1j * rng.normal(size=(2, 5))
        basis = "Z" if rng.random() < 0.3 else float(rng.uniform(-math.pi, math.pi))
        total = sum(b.probability for b in el.project_electron(v, basis))
        assert abs(total - 1) <= 1e-10

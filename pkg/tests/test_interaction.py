import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fegkp import electron as el
from fegkp.errors import InputError
from fegkp.fock import FockSpace, coherent_state, displacement_array, fock_state
from fegkp.interaction import (
    CouplingSpec, apply_interaction, comb_convergence, conditional_displacement, scattering_exact, scattering_matexp,
)
from fegkp.linalg import Operator, StateVector, fidelity, kron, kron_states, partial_trace

PLUS = StateVector((2,), np.array([1, 1]) / math.sqrt(2))
H = el.hadamard_array()

coupling = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)), st.floats(0, 1.5), st.floats(0, 2 * math.pi))


# --- coupling spec ------------------------------------------------------------

def test_coupling_spec_validation():
    assert CouplingSpec(1).g == 1 + 0j
    with pytest.raises(InputError):
        CouplingSpec(7)
    assert CouplingSpec(7, max_coupling=8).g == 7
    with pytest.raises(InputError):
        CouplingSpec(1, representation="dense")
    with pytest.raises(InputError):
        CouplingSpec(1, target_mode=0)
    with pytest.raises(InputError):
        CouplingSpec(complex("nan"))


# --- scattering matrix --------------------------------------------------------

def test_scattering_zero_is_identity():
    s = scattering_exact(0, 5, FockSpace(10))
    np.testing.assert_allclose(s.data, np.eye(50), atol=1e-14)


def test_scattering_ring_of_one_is_displacement():
    s = scattering_exact(0.6 - 0.2j, 1, FockSpace(30))
    np.testing.assert_allclose(s.data, displacement_array(30, 0.6 - 0.2j), atol=1e-14)


def test_scattering_fast_path_matches_matexp():
    fock = FockSpace(40)
    fast = scattering_exact(0.7, 17, fock).data.reshape(17, 40, 17, 40)
    slow = scattering_matexp(0.7, 17, fock).data.reshape(17, 40, 17, 40)
    assert np.abs(fast[:, :30, :, :30] - slow[:, :30, :, :30]).max() <= 1e-8


def test_truncated_ring_falls_back_with_warning():
    fock = FockSpace(12)
    with pytest.warns(RuntimeWarning):
        s = scattering_exact(0.3, 5, fock, boundary="truncated")
    ref = scattering_matexp(0.3, 5, fock, boundary="truncated")
    np.testing.assert_array_equal(s.data, ref.data)


def test_scattering_commutes_with_ring_translation():
    fock = FockSpace(20)
    m = 9
    s = scattering_exact(0.8j, m, fock).data
    t = np.kron(el.ladder_array(m), np.eye(20))
    assert np.abs(s @ t - t @ s).max() <= 1e-10


def test_apply_scattering_matches_operator():
    fock = FockSpace(20)
    spec = el.CombSpec(11, 1.0, 0.0, 2)
    e = el.comb_state(spec)
    start = kron_states(e, coherent_state(fock, 0.4))
    out = apply_interaction(start, CouplingSpec(0.5, 1, "comb"))
    ref = scattering_exact(0.5, 11, fock) @ start
    np.testing.assert_allclose(out.amps, ref.amps, atol=1e-12)


# --- conditional displacement ---------------------------------------------------

def test_cd_plus_branch():
    fock = FockSpace(40)
    out = conditional_displacement(0.9, fock) @ kron_states(PLUS, fock_state(fock, 0))
    want = kron_states(PLUS, coherent_state(fock, 0.9))
    np.testing.assert_allclose(out.amps, want.amps, atol=1e-12)


def test_cd_zero_is_identity():
    np.testing.assert_allclose(conditional_displacement(0, FockSpace(10)).data, np.eye(20), atol=1e-15)


def test_cd_forms_agree():
    rng = np.random.default_rng(0)
    fock = FockSpace(40)
    for _ in range(20):
        g = 3 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
        a = conditional_displacement(g, fock, "projector").data
        b = conditional_displacement(g, fock, "pauli").data
        assert np.abs(a - b).max() <= 1e-12


def test_cd_unknown_form():
    with pytest.raises(InputError):
        conditional_displacement(1, FockSpace(10), "series")


def test_cd_unitary_on_leading_block():
    fock = FockSpace(60)
    cd = conditional_displacement(1.2 + 0.5j, fock).data.reshape(2, 60, 2, 60)
    cols = cd[:, :, :, :30].reshape(120, 60)
    assert np.abs(cols.conj().T @ cols - np.eye(60)).max() <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1.2), st.floats(0, 1.2), st.floats(0, 2 * math.pi))
def test_cd_colinear_composition(r1, r2, phi):
    u = complex(math.cos(phi), math.sin(phi))
    fock = FockSpace(60)
    prod = conditional_displacement(r1 * u, fock).data @ conditional_displacement(r2 * u, fock).data
    ref = conditional_displacement((r1 + r2) * u, fock).data
    blk = lambda m: m.reshape(2, 60, 2, 60)[:, :30, :, :30]
    assert np.abs(blk(prod) - blk(ref)).max() <= 1e-9


@settings(max_examples=25, deadline=None)
@given(coupling)
def test_cd_hadamard_covariance(g):
    fock = FockSpace(30)
    hh = np.kron(H, np.eye(30))
    got = hh @ conditional_displacement(g, fock).data @ hh
    dp, dm = displacement_array(30, g), displacement_array(30, -g)
    want = np.kron(np.diag([1, 0]), dp) + np.kron(np.diag([0, 1]), dm)
    assert np.abs(got - want).max() <= 1e-10


# --- register application -----------------------------------------------------

def test_apply_on_second_mode():
    fock = FockSpace(20)
    reg = kron_states(kron_states(PLUS, fock_state(fock, 0)), fock_state(fock, 0))
    out = apply_interaction(reg, CouplingSpec(0.7, 2))
    want = kron_states(kron_states(PLUS, fock_state(fock, 0)), coherent_state(fock, 0.7))
    np.testing.assert_allclose(out.amps, want.amps, atol=1e-12)


def test_apply_rejects_bad_mode():
    reg = StateVector.basis((2, 5, 5), 0)
    with pytest.raises(InputError):
        apply_interaction(reg, CouplingSpec(0.1, 3))
    with pytest.raises(InputError):
        apply_interaction(StateVector.basis((3, 5), 0), CouplingSpec(0.1, 1))


@pytest.mark.parametrize("mode", [1, 2])
def test_apply_matches_dense_operator(mode):
    rng = np.random.default_rng(mode)
    fock = FockSpace(20)
    v = rng.normal(size=800) + 1j * rng.normal(size=800)
    # keep weight away from the cutoff so truncation does not enter
    t = v.reshape(2, 20, 20)
    t[:, 10:, :] = 0
    t[:, :, 10:] = 0
    reg = StateVector((2, 20, 20), t / np.linalg.norm(t))
    g = 0.6 + 0.3j
    cd = Operator((2, 20), conditional_displacement(g, fock).data)
    if mode == 1:
        full = kron(cd, Operator.identity((20,)))
    else:
        # CD acts on (electron, mode 2): build on (e, m2, m1) then permute
        full3 = kron(cd, Operator.identity((20,))).data.reshape(2, 20, 20, 2, 20, 20)
        full = Operator((2, 20, 20), full3.transpose(0, 2, 1, 3, 5, 4).reshape(800, 800))
    ref = full @ reg
    out = apply_interaction(reg, CouplingSpec(g, mode))
    assert np.abs(out.amps - ref.amps).max() <= 1e-10


def test_apply_preserves_norm():
    rng = np.random.default_rng(7)
    for _ in range(100):
        t = np.zeros((2, 40, 4), dtype=complex)
        t[:, :12, :] = rng.normal(size=(2, 12, 4)) + 1j * rng.normal(size=(2, 12, 4))
        reg = StateVector((2, 40, 4), t / np.linalg.norm(t))
        g = complex(*rng.uniform(-1, 1, 2))
        out = apply_interaction(reg, CouplingSpec(g, 1))
        assert abs(out.norm() - 1) <= 1e-10


# --- comb -> qubit convergence --------------------------------------------------

def test_comb_convergence_sentinel():
    assert comb_convergence(0.5, [math.inf], FockSpace(40)) == [pytest.approx(1.0, abs=1e-14)]


def test_comb_convergence_baselines():
    fids = comb_convergence(0.5, [2, 4, 8], FockSpace(60))
    assert fids == sorted(fids)
    np.testing.assert_allclose(fids, [0.9881936806865993, 0.9967487014134051, 0.9991664506132932], atol=1e-6)


def test_comb_convergence_superposed_input():
    fids = comb_convergence(0.5, [2, 4, 8], FockSpace(60), qubit_amps=(1, 1))
    assert fids == sorted(fids)
    np.testing.assert_allclose(fids, [0.9450, 0.9847, 0.9961], atol=1e-4)


def test_comb_fidelity_matches_qubit_reduction():
    # the reduced photon state from the wide comb approaches the qubit-level one
    fock = FockSpace(40)
    spec = el.CombSpec(el.qubit_ring_size(8), 8, 0.0, 2)
    e0 = el.embed_qubit(spec, (1, 0))
    out = apply_interaction(kron_states(e0, fock_state(fock, 0)), CouplingSpec(0.5, 1, "comb"))
    ideal = apply_interaction(kron_states(StateVector.basis((2,), 0), fock_state(fock, 0)), CouplingSpec(0.5, 1))
    assert fidelity(partial_trace(out, [1]), partial_trace(ideal, [1])) >= 0.99

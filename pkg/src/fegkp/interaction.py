"""Electron-photon coupling.

The exact scattering matrix ``S(g) = exp(g b a^dag - conj(g) b^dag a)`` acts on
comb (x) Fock. On a periodic ring ``b`` is a cyclic shift with eigenvectors
``f_k(n) = exp(2 pi i k n / M)/sqrt M`` and eigenvalues ``lambda_k = exp(2 pi i k / M)``,
so ``S`` is block diagonal: ``D(g lambda_k)`` on Fourier block ``k``. When the
comb is wide, ``b`` acts as ``sigma_x`` on the comb qubit and ``S`` reduces to the
conditional displacement ``CD(g) = |+><+| D(g) + |-><-| D(-g)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import electron as el
from .errors import InputError
from .fock import FockSpace, _ladder_array, displacement_array, displacement_batch, _check_amplitude
from .linalg import Operator, StateVector, check_budget, expm_array

#: Default ceiling on |g| so couplings stay inside typical Fock cutoffs.
MAX_COUPLING = 6.0

_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CouplingSpec:
    """One electron pass: coupling ``g`` to photonic mode ``target_mode`` (1-based)."""

    g: complex
    target_mode: int = 1
    representation: str = "qubit"
    max_coupling: float = MAX_COUPLING

    def __post_init__(self):
        g = complex(self.g)
        if not (math.isfinite(g.real) and math.isfinite(g.imag)):
            raise InputError(f"coupling must be finite, got {self.g}")
        if abs(g) > self.max_coupling:
            raise InputError(f"|g| = {abs(g):.3g} exceeds the configured maximum {self.max_coupling}")
        if self.representation not in ("qubit", "comb"):
            raise InputError(f"representation must be 'qubit' or 'comb', got {self.representation!r}")
        if int(self.target_mode) != self.target_mode or self.target_mode < 1:
            raise InputError(f"target_mode must be a positive integer, got {self.target_mode}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "target_mode", int(self.target_mode))


# --- helpers -----------------------------------------------------------------

def apply_on_axis(tensor: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``mat`` with one axis of an amplitude tensor."""
    out = np.tensordot(mat, tensor, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def _fourier_matrix(ring_size: int) -> np.ndarray:
    n = np.arange(ring_size) - (ring_size - 1) // 2
    k = np.arange(ring_size)
    return np.exp(2j * np.pi * np.outer(n, k) / ring_size) / math.sqrt(ring_size)


def _fourier_displacements(g: complex, ring_size: int, cutoff: int) -> np.ndarray:
    lam = el.ladder_eigenvalues(ring_size)
    return displacement_batch(cutoff, complex(g) * lam)


# --- scattering matrix -------------------------------------------------------

def scattering_generator(g: complex, ring_size: int, cutoff: int, boundary: str = "periodic") -> np.ndarray:
    b = el.ladder_array(ring_size, boundary)
    a = _ladder_array(cutoff)
    return complex(g) * np.kron(b, a.conj().T) - np.conj(g) * np.kron(b.conj().T, a)


def scattering_matexp(g: complex, ring_size: int, fock: FockSpace, boundary: str = "periodic",
                      pad: int | None = None) -> Operator:
    """Oracle: dense exponential of the full generator, built ``pad`` levels above the cutoff."""
    n = fock.cutoff
    if pad is None:
        pad = max(20, n // 2)
    big = n + int(pad)
    check_budget((ring_size * big) ** 2 * 4, "scattering matexp")
    full = expm_array(scattering_generator(g, ring_size, big, boundary))
    full = full.reshape(ring_size, big, ring_size, big)[:, :n, :, :n]
    return Operator((ring_size, n), full.reshape(ring_size * n, ring_size * n))


def scattering_exact(g: complex, ring_size: int, fock: FockSpace, boundary: str = "periodic") -> Operator:
    """``S(g)`` on ring (x) Fock by Fourier diagonalisation of the periodic ladder."""
    if boundary != "periodic":
        warnings.warn("truncated ring has no Fourier fast path; using the dense exponential",
                      RuntimeWarning, stacklevel=2)
        return scattering_matexp(g, ring_size, fock, boundary)
    n = fock.cutoff
    _check_amplitude(fock, g, "scattering")
    check_budget((ring_size * n) ** 2, "scattering matrix")
    f = _fourier_matrix(ring_size)
    dk = _fourier_displacements(g, ring_size, n)
    # S[(r,i),(s,j)] = sum_k f[r,k] conj(f[s,k]) D_k[i,j]
    full = np.einsum("rk,sk,kij->risj", f, f.conj(), dk, optimize=True)
    return Operator((ring_size, n), full.reshape(ring_size * n, ring_size * n))


def apply_scattering(tensor: np.ndarray, g: complex, axis: int) -> np.ndarray:
    """Apply ``S(g)`` between ring axis 0 and photonic ``axis`` of an amplitude tensor."""
    ring_size, n = tensor.shape[0], tensor.shape[axis]
    f = _fourier_matrix(ring_size)
    dk = _fourier_displacements(g, ring_size, n)
    tk = np.tensordot(f.conj().T, tensor, axes=(1, 0))
    blocks = np.stack([apply_on_axis(tk[k], dk[k], axis - 1) for k in range(ring_size)])
    return np.tensordot(f, blocks, axes=(1, 0))


# --- qubit-level conditional displacement -----------------------------------

def conditional_displacement(g: complex, fock: FockSpace, form: str = "projector") -> Operator:
    """``CD(g)`` on qubit (x) Fock, electron first.

    ``form="projector"`` sums ``|+-><+-| (x) D(+-g)``; ``form="pauli"`` uses
    ``[(D(g)+D(-g)) (x) I + (D(g)-D(-g)) (x) sigma_x] / 2``.
    """
    _check_amplitude(fock, g, "conditional displacement")
    dp = displacement_array(fock.cutoff, g)
    dm = displacement_array(fock.cutoff, -complex(g))
    if form == "projector":
        plus = np.full((2, 2), 0.5, dtype=complex)
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
        data = np.kron(plus, dp) + np.kron(minus, dm)
    elif form == "pauli":
        data = 0.5 * (np.kron(np.eye(2), dp + dm) + np.kron(el._PAULI_X, dp - dm))
    else:
        raise InputError(f"unknown CD form {form!r}")
    return Operator((2, fock.cutoff), data)


def apply_cd(tensor: np.ndarray, g: complex, axis: int) -> np.ndarray:
    """Apply ``CD(g)`` branch-wise in the electron X basis (electron is axis 0)."""
    n = tensor.shape[axis]
    plus = (tensor[0] + tensor[1]) / _SQ2
    minus = (tensor[0] - tensor[1]) / _SQ2
    plus = apply_on_axis(plus, displacement_array(n, g), axis - 1)
    minus = apply_on_axis(minus, displacement_array(n, -complex(g)), axis - 1)
    return np.stack([(plus + minus) / _SQ2, (plus - minus) / _SQ2])


def apply_interaction(state: StateVector, spec: CouplingSpec) -> StateVector:
    """Apply one electron pass to a register ``(electron, mode 1, ..., mode M)``.

    Works on the amplitude tensor; no register-wide operator is formed.
    """
    n_modes = len(state.dims) - 1
    if n_modes < 1:
        raise InputError("register has no photonic mode")
    if spec.target_mode > n_modes:
        raise InputError(f"mode {spec.target_mode} out of range for {n_modes} modes")
    axis = spec.target_mode
    if spec.representation == "qubit":
        if state.dims[0] != 2:
            raise InputError("qubit representation needs a two-level electron")
        out = apply_cd(state.tensor(), spec.g, axis)
    else:
        out = apply_scattering(state.tensor(), spec.g, axis)
    return StateVector(state.dims, out)


# --- comb -> qubit convergence ----------------------------------------------

def comb_convergence(g: complex, sigmas, fock: FockSpace, qubit_amps=(1.0, 0.0)) -> list[float]:
    """Fidelity between exact comb scattering and the qubit-level CD prediction.

    For each ``sigma`` the electron starts in ``alpha|0>_e + beta|1>_e`` (comb
    representation, ring size from :func:`electron.qubit_ring_size`) and the
    photon in vacuum. ``sigma = inf`` uses a two-site ring where ``b = sigma_x``
    exactly.
    """
    amps = np.asarray(qubit_amps, dtype=complex)
    amps = amps / np.linalg.norm(amps)
    n = fock.cutoff
    vac = np.zeros(n, dtype=complex)
    vac[0] = 1.0
    ideal = apply_cd(np.outer(amps, vac), g, 1)
    out = []
    for sigma in sigmas:
        if math.isinf(sigma):
            zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
        else:
            spec = el.CombSpec(el.qubit_ring_size(sigma), sigma, 0.0, 2)
            z, o = el.qubit_states(spec)
            zero, one = z.amps, o.amps
        embed = np.outer(zero, ideal[0]) + np.outer(one, ideal[1])
        start = np.outer(amps[0] * zero + amps[1] * one, vac)
        got = apply_scattering(start, g, 1)
        out.append(float(abs(np.vdot(embed, got)) ** 2))
    return out

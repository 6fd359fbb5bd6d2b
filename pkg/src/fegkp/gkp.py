"""Finite-energy GKP code on a truncated Fock space.

Lattice constants ``a_x, a_y, a_z`` are complex displacement amplitudes: ``D(a_i/2)``
is the logical Pauli and ``D(a_i)`` the stabilizer. Logical decoding bins the
rotated quadrature conjugate to the logical axis.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError, TruncationError
from .fock import FockSpace, displacement_array, hermite_functions, rotation_diag
from .interaction import apply_on_axis
from .linalg import Operator, StateVector, fidelity

LOGICAL_LABELS = ("0", "1", "+", "-")

# codewords are computed this much above the cutoff to measure the truncated tail
_TAIL_FACTOR = 1.6
#: Largest tolerated norm fraction above the cutoff before gkp_state refuses.
MAX_TAIL_WEIGHT = 1e-2
# Gauss-Legendre nodes per decode bin
_BIN_NODES = 80
#: Decode results whose confidence is below 0.5 + this are flagged ambiguous.
AMBIGUITY_MARGIN = 0.05


@dataclass(frozen=True)
class GkpCode:
    a_x: complex
    a_y: complex
    a_z: complex
    delta: float
    fock: FockSpace

    def __post_init__(self):
        for name in ("a_x", "a_y", "a_z"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(self.a_y - self.a_x - self.a_z) > 1e-12 * abs(self.a_x):
            raise InputError("lattice constants must satisfy a_y = a_x + a_z")
        area = (np.conj(self.a_x) * self.a_z).imag
        if abs(abs(area) - 2 * math.pi) > 1e-9:
            raise InputError(f"Im(conj(a_x) a_z) must be +-2 pi, got {area:.6g}")
        if not 0 < self.delta < 1:
            raise InputError(f"delta must be in (0, 1), got {self.delta}")

    @property
    def cutoff(self) -> int:
        return self.fock.cutoff

    def lattice(self, axis: str) -> complex:
        axis = axis.upper()
        if axis not in ("X", "Y", "Z"):
            raise InputError(f"unknown lattice axis {axis!r}")
        return getattr(self, "a_" + axis.lower())

    def bin_width(self, basis: str) -> float:
        """Spacing of the codeword peaks in the quadrature read for ``basis``."""
        return abs(self.lattice("Z" if basis.upper() == "X" else "X")) / math.sqrt(2.0)

    def bin_angle(self, basis: str) -> float:
        """Quadrature angle read out for ``basis``: Z reads along ``a_x``, X along ``a_z``."""
        return float(np.angle(self.lattice("X" if basis.upper() == "Z" else "Z")))


def square_code(delta: float = 0.25, fock: FockSpace | int = 150) -> GkpCode:
    if not isinstance(fock, FockSpace):
        fock = FockSpace(int(fock))
    s = math.sqrt(2 * math.pi)
    return GkpCode(s, s * (1 + 1j), 1j * s, float(delta), fock)


# --- code states -------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _codeword(n: int, delta: float, spacing: float, theta: float, mu: int):
    big = int(math.ceil(n * _TAIL_FACTOR))
    reach = math.sqrt(2 * big + 1) + 12.0
    kmax = int(reach / (2 * spacing)) + 2
    xs = (2 * np.arange(-kmax, kmax + 1) + mu) * spacing
    c = hermite_functions(big, xs).sum(axis=1) * np.exp(-(delta**2) * np.arange(big))
    c = c * np.exp(1j * theta * np.arange(big))
    total = np.vdot(c, c).real
    tail = float(np.vdot(c[n:], c[n:]).real / total)
    out = c[:n] / np.linalg.norm(c[:n])
    out.setflags(write=False)
    return out, tail


def codeword_tail(code: GkpCode) -> float:
    """Norm fraction of the finite-energy codeword lying above the cutoff."""
    return _codeword(code.cutoff, code.delta, code.bin_width("Z"), code.bin_angle("Z"), 0)[1]


def gkp_state(code: GkpCode, logical: str = "0") -> StateVector:
    """Finite-energy codeword ``exp(-delta^2 n) sum_k |x = (2k + mu) w>`` renormalised."""
    logical = str(logical)
    if logical not in LOGICAL_LABELS:
        raise InputError(f"logical label must be one of {LOGICAL_LABELS}, got {logical!r}")
    n = code.cutoff
    if n < 4 / code.delta**2:
        warnings.warn(
            f"cutoff {n} is below the 4/delta^2 = {4 / code.delta**2:.1f} floor", RuntimeWarning, stacklevel=2
        )
    w, th = code.bin_width("Z"), code.bin_angle("Z")
    zero, tail = _codeword(n, code.delta, w, th, 0)
    if tail > MAX_TAIL_WEIGHT:
        raise TruncationError(
            f"codeword tail above cutoff {n} is {tail:.2g}", required_cutoff=int(math.ceil(4 / code.delta**2))
        )
    one, _ = _codeword(n, code.delta, w, th, 1)
    if logical == "0":
        amps = zero
    elif logical == "1":
        amps = one
    else:
        amps = zero + (1 if logical == "+" else -1) * one
        amps = amps / np.linalg.norm(amps)
    return StateVector((n,), amps)


def logical_state(code: GkpCode, qubit_amps) -> StateVector:
    """``alpha|0_L> + beta|1_L>`` renormalised (the codewords overlap only at O(exp(-pi/2 delta^2)))."""
    a, b = np.asarray(qubit_amps, dtype=complex)
    amps = a * gkp_state(code, "0").amps + b * gkp_state(code, "1").amps
    return StateVector((code.cutoff,), amps / np.linalg.norm(amps))


_DISPLACEMENTS = {"X": 0.5, "Y": 0.5, "Z": 0.5, "S_X": 1.0, "S_Y": 1.0, "S_Z": 1.0}


def logical_amplitude(code: GkpCode, which: str) -> complex:
    which = which.upper()
    if which not in _DISPLACEMENTS:
        raise InputError(f"unknown logical displacement {which!r}")
    return _DISPLACEMENTS[which] * code.lattice(which[-1])


def logical_displacement(code: GkpCode, which: str) -> Operator:
    """``D(a_i/2)`` for ``X, Y, Z``; ``D(a_i)`` for stabilizers ``S_X, S_Y, S_Z``."""
    n = code.cutoff
    return Operator((n,), displacement_array(n, logical_amplitude(code, which)))


def hadamard_rotation(n: int, quarter_turns: int = 1) -> np.ndarray:
    """Diagonal of ``U^q = exp(-i pi n q/2)``, with ``U^-q D(g) U^q = D(i^q g)``."""
    return rotation_diag(n, -0.5 * math.pi * quarter_turns)


# --- binned logical observables ---------------------------------------------

@functools.lru_cache(maxsize=32)
def _parity_projectors(n: int, width: float, theta: float):
    """Projectors onto the even and odd bins ``[(j - 1/2) w, (j + 1/2) w)`` of ``x_theta``."""
    reach = math.sqrt(2 * n + 1) + 12.0
    jmax = int(math.ceil(reach / width)) + 1
    nodes, weights = np.polynomial.legendre.leggauss(_BIN_NODES)
    out = []
    for parity in (0, 1):
        js = np.arange(-jmax, jmax + 1)
        js = js[np.mod(js, 2) == parity]
        x = ((js[:, None] + 0.5 * nodes[None, :]) * width).ravel()
        wts = np.tile(0.5 * width * weights, js.size)
        h = hermite_functions(n, x)
        gram = (h * wts) @ h.T
        ph = np.exp(1j * theta * np.arange(n))
        proj = ph[:, None] * gram * ph.conj()[None, :]
        proj.setflags(write=False)
        out.append(proj)
    return tuple(out)


def bin_projectors(code: GkpCode, basis: str, cutoff: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Projectors ``(P_0, P_1)`` onto the logical-0 and logical-1 quadrature bins for ``basis``."""
    basis = basis.upper()
    if basis not in ("X", "Z"):
        raise InputError(f"decode basis must be X or Z, got {basis!r}")
    n = code.cutoff if cutoff is None else int(cutoff)
    return _parity_projectors(n, code.bin_width(basis), code.bin_angle(basis))


def binned_pauli(code: GkpCode, basis: str) -> Operator:
    """Sign-of-bin observable ``P_0 - P_1``; the ideal-limit logical Pauli."""
    p0, p1 = bin_projectors(code, basis)
    return Operator((code.cutoff,), p0 - p1)


def _expect_product(state, mats) -> float:
    """``<state| (x)_m mats[m] |state>`` for a pure or mixed multi-mode state (``None`` = identity)."""
    if isinstance(state, StateVector):
        psi = state.tensor()
        phi = psi
        for axis, m in enumerate(mats):
            if m is not None:
                phi = apply_on_axis(phi, m, axis)
        return float(np.vdot(psi, phi).real)
    dims = state.dims
    rho = state.data.reshape(dims + dims)
    for axis, m in enumerate(mats):
        if m is not None:
            rho = apply_on_axis(rho, m, axis)
    return float(np.real(np.trace(rho.reshape(state.data.shape))))


def _pauli_label(pauli: str, modes: int) -> str:
    pauli = pauli.upper()
    if len(pauli) != modes or any(c not in "IXZ" for c in pauli):
        raise InputError(f"Pauli string {pauli!r} must use I, X, Z and have one letter per mode ({modes})")
    return pauli


def pauli_expectation(state, code: GkpCode, pauli: str) -> float:
    """Expectation of a binned logical Pauli string such as ``"XZI"`` on a multi-mode state."""
    pauli = _pauli_label(pauli, len(state.dims))
    mats = []
    for c, n in zip(pauli, state.dims):
        if c == "I":
            mats.append(None)
        else:
            p0, p1 = bin_projectors(code, c, n)
            mats.append(p0 - p1)
    return _expect_product(state, mats)


def bit_distribution(state, code: GkpCode, bases: str) -> dict[str, float]:
    """Joint probability of the decoded bit strings, one basis letter (X/Z) per mode."""
    bases = _pauli_label(bases, len(state.dims))
    if "I" in bases:
        raise InputError("bit_distribution needs X or Z on every mode")
    projs = [bin_projectors(code, c, n) for c, n in zip(bases, state.dims)]
    out = {}
    for idx in np.ndindex(*(2,) * len(projs)):
        key = "".join(str(b) for b in idx)
        out[key] = _expect_product(state, [p[b] for p, b in zip(projs, idx)])
    return out


class Decoded(NamedTuple):
    bit: int
    confidence: float

    @property
    def ambiguous(self) -> bool:
        return self.confidence < 0.5 + AMBIGUITY_MARGIN


def decode_logical(state, code: GkpCode, basis: str = "Z") -> Decoded:
    """Homodyne-style decode of a single mode: majority bin parity and its probability mass."""
    if len(state.dims) != 1:
        raise InputError("decode_logical takes a single-mode state; use bit_distribution for registers")
    probs = bit_distribution(state, code, basis.upper())
    p0, p1 = probs["0"], probs["1"]
    return Decoded(0, p0) if p0 >= p1 else Decoded(1, p1)


def logical_fidelity(state, code: GkpCode, target, frame: complex = 0.0) -> float:
    """Fidelity of ``D(-frame) state`` with the target codeword.

    ``target`` is a logical label or a pair of logical amplitudes.
    """
    if isinstance(target, str):
        ref = gkp_state(code, target)
    else:
        ref = logical_state(code, target)
    n = code.cutoff
    if frame != 0:
        # renormalise: the truncated displacement drops the codeword tail near the cutoff
        d = displacement_array(n, -complex(frame))
        if isinstance(state, StateVector):
            state = StateVector(state.dims, d @ state.amps).normalized()
        else:
            rho = d @ state.data @ d.conj().T
            state = Operator(state.dims, rho / np.trace(rho).real)
    return fidelity(state, ref)


# --- code-space projection ----------------------------------------------------

def _dual_basis(code: GkpCode, n: int) -> np.ndarray:
    """Rows ``r_k`` with ``r_k . |j_L> = delta_jk`` (symmetric orthonormalisation of the codewords)."""
    if n != code.cutoff:
        raise InputError(f"mode dimension {n} differs from the code cutoff {code.cutoff}")
    basis = np.stack([gkp_state(code, "0").amps, gkp_state(code, "1").amps])
    gram = basis.conj() @ basis.T
    w, v = np.linalg.eigh(gram)
    return (v @ np.diag(w**-0.5) @ v.conj().T) @ basis.conj()


def code_projection(state: StateVector, code: GkpCode) -> tuple[np.ndarray, float]:
    """Logical amplitudes of a pure register, one qubit per mode, and the weight kept by the projection.

    The weight measures distortion outside the code space; the normalised
    amplitudes carry the logical content.
    """
    t = state.tensor()
    for axis, n in enumerate(state.dims):
        t = apply_on_axis(t, _dual_basis(code, n), axis)
    weight = float(np.vdot(t, t).real)
    if weight == 0:
        raise InputError("state has no weight in the code space")
    return t / math.sqrt(weight), weight


def projected_fidelity(a: StateVector, b, code: GkpCode) -> float:
    """Fidelity of the code-space projections of ``a`` and ``b`` (``b`` may be logical amplitudes)."""
    la, _ = code_projection(a, code)
    lb = code_projection(b, code)[0] if isinstance(b, StateVector) else np.asarray(b, dtype=complex)
    lb = lb / np.linalg.norm(lb)
    return float(abs(np.vdot(la.ravel(), lb.ravel())) ** 2)

"""The free-electron ancilla: energy combs on a ring lattice and the comb qubit.

Energy index ``n`` labels the sideband ``E0 + n hbar omega``. The ladder ``b``
lowers the index by one (photon emission), ``b|n> = |n-1>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateBranchError, InputError
from .linalg import Operator, StateVector, expm_array

_SQ2 = math.sqrt(2.0)

#: Branches below this Born probability are treated as impossible.
BRANCH_EPS = 1e-14


@dataclass(frozen=True)
class CombSpec:
    """Gaussian energy comb ``sum_n exp(-n^2/2 sigma^2) exp(i phi n) |n>`` on teeth ``n = 0 mod spacing``.

    ``sigma = 0`` is the single-tooth sentinel.
    """

    ring_size: int
    sigma: float
    phi: float = 0.0
    spacing: int = 1

    def __post_init__(self):
        if int(self.ring_size) != self.ring_size or self.ring_size < 1 or self.ring_size % 2 == 0:
            raise InputError(f"ring size must be a positive odd integer, got {self.ring_size}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InputError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.ring_size < 8 * self.sigma + 1:
            raise InputError(
                f"ring of {self.ring_size} sites truncates a sigma={self.sigma} comb; need >= {8 * self.sigma + 1:g}"
            )
        if self.spacing not in (1, 2):
            raise InputError(f"comb spacing must be 1 or 2, got {self.spacing}")

    @property
    def indices(self) -> np.ndarray:
        return ring_indices(self.ring_size)


def ring_indices(ring_size: int) -> np.ndarray:
    half = (ring_size - 1) // 2
    return np.arange(-half, half + 1)


def qubit_ring_size(sigma: float) -> int:
    """Smallest ring that holds a ``sigma`` comb and keeps the qubit shift wrap-free (size = 3 mod 4)."""
    size = int(math.ceil(8 * sigma + 1))
    while size % 4 != 3:
        size += 1
    return size


def comb_amplitudes(spec: CombSpec) -> np.ndarray:
    n = spec.indices
    if spec.sigma == 0:
        amps = (n == 0).astype(complex)
    else:
        amps = np.exp(-(n**2) / (2 * spec.sigma**2) + 1j * spec.phi * n)
        amps = np.where(n % spec.spacing == 0, amps, 0.0)
    return amps / np.linalg.norm(amps)


def comb_state(spec: CombSpec) -> StateVector:
    return StateVector((spec.ring_size,), comb_amplitudes(spec))


def ladder_array(ring_size: int, boundary: str = "periodic") -> np.ndarray:
    b = np.eye(ring_size, k=1, dtype=complex)
    if boundary == "periodic":
        b[ring_size - 1, 0] = 1.0
    elif boundary != "truncated":
        raise InputError(f"unknown ring boundary {boundary!r}")
    return b


def ladder(ring_size: int, boundary: str = "periodic") -> Operator:
    """Energy-lowering shift on the ring; exactly unitary for the periodic boundary."""
    return Operator((ring_size,), ladder_array(ring_size, boundary))


def ladder_eigenvalues(ring_size: int) -> np.ndarray:
    """Eigenvalues of the periodic ladder, ordered like ``numpy.fft`` frequencies."""
    k = np.arange(ring_size)
    return np.exp(2j * np.pi * k / ring_size)


def qubit_states(spec: CombSpec) -> tuple[StateVector, StateVector]:
    """``|0>_e`` (even-tooth comb) and ``|1>_e = b|0>_e`` (odd teeth)."""
    if spec.spacing != 2:
        raise InputError("qubit basis needs a comb with spacing 2")
    if spec.ring_size % 4 != 3 and spec.sigma > 0:
        raise InputError(
            f"ring size {spec.ring_size} wraps the lowest even tooth onto an even site; "
            f"use a size = 3 mod 4 such as {qubit_ring_size(spec.sigma)}"
        )
    zero = comb_amplitudes(CombSpec(spec.ring_size, spec.sigma, 0.0, 2))
    one = ladder_array(spec.ring_size) @ zero
    return StateVector((spec.ring_size,), zero), StateVector((spec.ring_size,), one)


def embed_qubit(spec: CombSpec, qubit_amps) -> StateVector:
    """Map ``alpha|0> + beta|1>`` onto the comb representation."""
    zero, one = qubit_states(spec)
    a, b = np.asarray(qubit_amps, dtype=complex)
    return StateVector(zero.dims, a * zero.amps + b * one.amps)


# --- qubit-level gates -------------------------------------------------------

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def rotation_array(axis: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    axis = axis.upper()
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "Z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise InputError(f"electron rotations exist about X (PINEM) and Z (drift), not {axis!r}")


def electron_rotation(axis: str, angle: float) -> Operator:
    """``R_axis(angle) = exp(-i angle sigma_axis / 2)``; X is a PINEM pulse, Z a drift."""
    return Operator((2,), rotation_array(axis, angle))


def hadamard_array() -> np.ndarray:
    # R_z R_x R_z at quarter turns equals -i H
    return 1j * rotation_array("Z", math.pi / 2) @ rotation_array("X", math.pi / 2) @ rotation_array("Z", math.pi / 2)


def hadamard() -> Operator:
    return Operator((2,), hadamard_array())


def gate_array(name: str, angle: float = 0.0) -> np.ndarray:
    """Named electron gate: ``H``, ``X`` or ``Z`` rotations by ``angle``."""
    if name.upper() == "H":
        return hadamard_array()
    return rotation_array(name, angle)


# --- comb-level gates --------------------------------------------------------

def comb_pinem(ring_size: int, angle: float) -> Operator:
    """Classical-light PINEM ``exp(-i angle (b + b^dag)/4)``; acts as ``R_x(angle)`` on the comb qubit."""
    b = ladder_array(ring_size)
    return Operator((ring_size,), expm_array(-0.25j * angle * (b + b.conj().T)))


def comb_drift(ring_size: int, angle: float) -> Operator:
    """Free propagation ``exp(i angle n^2)``, diagonal in energy.

    For quarter-turn angles the quadratic phase depends on tooth parity only
    and equals ``R_z(angle)`` on the comb qubit up to a global phase.
    """
    n = ring_indices(ring_size)
    return Operator((ring_size,), np.diag(np.exp(1j * angle * n.astype(float) ** 2)))


# --- measurement -------------------------------------------------------------

def basis_bras(basis) -> tuple[tuple[str, str], np.ndarray]:
    """Outcome labels and the bra rows of a measurement basis.

    ``basis`` is ``"Z"`` (outcomes ``0``/``1``) or an angle ``phi`` selecting
    ``|phi+/-> = (e^{i phi/2}|0> +/- e^{-i phi/2}|1>)/sqrt 2`` (outcomes ``+``/``-``).
    """
    if isinstance(basis, str):
        if basis.upper() != "Z":
            raise InputError(f"unknown electron basis {basis!r}")
        return ("0", "1"), np.eye(2, dtype=complex)
    phi = float(basis)
    kets = np.array([
        [np.exp(0.5j * phi), np.exp(-0.5j * phi)],
        [np.exp(0.5j * phi), -np.exp(-0.5j * phi)],
    ]) / _SQ2
    return ("+", "-"), kets.conj()


class Branch(NamedTuple):
    outcome: str
    probability: float
    state: np.ndarray | None  # normalized remaining amplitudes, None when degenerate


def project_electron(tensor: np.ndarray, basis) -> list[Branch]:
    """Project axis 0 of an amplitude tensor onto each basis state.

    Probabilities are relative to the tensor's own norm, so norm lost to Fock
    truncation upstream does not leak into the Born statistics.
    """
    labels, bras = basis_bras(basis)
    total = float(np.vdot(tensor, tensor).real)
    if not total > 0:
        raise InputError("cannot measure the zero vector")
    out = []
    for label, bra in zip(labels, bras):
        rest = np.tensordot(bra, tensor, axes=(0, 0))
        prob = float(np.vdot(rest, rest).real) / total
        out.append(Branch(label, prob, rest / math.sqrt(prob * total) if prob >= BRANCH_EPS else None))
    return out


def measure_electron(joint: StateVector, basis=0.0, branch: str | None = None, rng=None):
    """Measure the electron (subsystem 0, qubit representation).

    * ``branch`` given: return that :class:`Branch` (raises when degenerate).
    * ``rng`` given: sample one branch with ``rng.random()``.
    * otherwise: return both branches with their Born probabilities.

    Returned states are :class:`StateVector` objects on the remaining subsystems.
    """
    if joint.dims[0] != 2:
        raise InputError("electron must be subsystem 0 in the qubit representation")
    rest_dims = joint.dims[1:] or (1,)
    branches = [
        Branch(b.outcome, b.probability, None if b.state is None else StateVector(rest_dims, b.state))
        for b in project_electron(joint.tensor(), basis)
    ]
    if branch is not None:
        for b in branches:
            if b.outcome == branch:
                if b.state is None:
                    raise DegenerateBranchError(f"branch {branch!r} has probability {b.probability:.3g}")
                return b
        raise InputError(f"no outcome {branch!r} in this basis")
    if rng is not None:
        p0 = branches[0].probability / (branches[0].probability + branches[1].probability)
        return branches[0] if rng.random() < p0 else branches[1]
    return branches

"""Compilers from logical protocols to physical schedules.

Every outcome label and frame offset below follows from the CD algebra in the
electron X basis and is pinned by the protocol tests:

* readout with ``|0>_e`` and ``g = a_i/4``: ``P(0) = (1 + Re<D(a_i/2)>)/2``, so
  ``0`` is the +1 eigenvalue; both branches carry ``D(-a_i/4)``.
* rotation measured in ``|phi +->``: the ``-`` branch holds ``R_i(phi) psi`` and the
  ``+`` branch ``sigma_i R_i(phi) psi``, so ``+`` is the one that needs a Pauli pass.
* cnot2 and GHZ: outcome ``1`` is the target state, ``0`` needs ``Z`` on the first mode.
"""
from __future__ import annotations

from ..errors import InputError
from ..gkp import GkpCode
from ..linalg import check_budget
from .schedule import ElectronGate, FrameShift, Interact, MeasureElectron, NewElectron, Schedule

_NO_FF_PHI = {"+": (), "-": ()}
_NO_FF_Z = {"0": (), "1": ()}


def _axis(axis: str) -> str:
    axis = str(axis).upper()
    if axis not in ("X", "Y", "Z"):
        raise InputError(f"axis must be X, Y or Z, got {axis!r}")
    return axis


def pauli_steps(code: GkpCode, axis: str, mode: int = 1, sign: int = 1) -> tuple:
    """One ``|+>_e`` pass at ``g = sign a_i/2``; the electron factors out with outcome ``+``."""
    g = sign * code.lattice(_axis(axis)) / 2
    return (NewElectron("+"), Interact(g, mode), MeasureElectron(0.0, _NO_FF_PHI))


def compile_pauli(code: GkpCode, axis: str, mode: int = 1, n_modes: int | None = None) -> Schedule:
    return Schedule(pauli_steps(code, axis, mode), n_modes or mode, code, f"pauli-{_axis(axis)}")


def compile_readout(code: GkpCode, axis: str, mode: int = 1, n_modes: int | None = None) -> Schedule:
    """Controlled-Pauli readout; outcome ``0`` means logical eigenvalue +1."""
    a = code.lattice(_axis(axis))
    steps = (NewElectron("0"), Interact(a / 4, mode), MeasureElectron("Z", _NO_FF_Z), FrameShift(mode, -a / 4))
    return Schedule(steps, n_modes or mode, code, f"readout-{_axis(axis)}")


def compile_rotation(code: GkpCode, axis: str, angle: float, mode: int = 1, n_modes: int | None = None) -> Schedule:
    """Teleported ``R_i(angle)`` with the electron measured in ``|angle +->``.

    The ``+`` branch is corrected with a ``-a_i/2`` Pauli pass (the sign that keeps
    the net displacement small and the envelope intact).
    """
    a = code.lattice(_axis(axis))
    ff = {"+": pauli_steps(code, axis, mode, sign=-1), "-": ()}
    steps = (NewElectron("0"), Interact(a / 4, mode), MeasureElectron(float(angle), ff), FrameShift(mode, -a / 4))
    return Schedule(steps, n_modes or mode, code, f"rotation-{_axis(axis)}")


def compile_cnot2(code: GkpCode, control: int = 1, target: int = 2) -> Schedule:
    """``CNOT`` from ``control`` to ``target`` with a single electron."""
    if control == target:
        raise InputError("control and target modes must differ")
    ff = {"0": pauli_steps(code, "Z", control, sign=-1), "1": ()}
    steps = (
        NewElectron("0"),
        Interact(code.a_z / 4, control),
        ElectronGate("H"),
        Interact(code.a_x / 4, target),
        MeasureElectron("Z", ff),
        FrameShift(control, -code.a_z / 4),
        FrameShift(target, code.a_x / 4),
    )
    return Schedule(steps, max(control, target), code, "cnot2")


def _check_register(code: GkpCode, n_modes: int):
    if int(n_modes) != n_modes or n_modes < 2:
        raise InputError(f"modes must be >= 2, got {n_modes}")
    check_budget(2 * code.cutoff ** int(n_modes), f"{n_modes}-mode register")


def correction_pass(code: GkpCode, n_modes: int, g: complex) -> tuple:
    """One ``|+>_e`` electron displacing every mode by ``g``."""
    steps = [NewElectron("+")]
    steps += [Interact(g, m) for m in range(1, n_modes + 1)]
    steps.append(MeasureElectron(0.0, _NO_FF_PHI))
    return tuple(steps)


def compile_ghz(code: GkpCode, n_modes: int = 3, physical_correction: bool = False) -> Schedule:
    """GHZ state from a ``|+>_e`` electron doing an H-conjugated ``a_x/4`` pass per mode.

    Each pass is a ``CNOT`` from electron to mode up to ``D(-a_x/4)``. That residual
    displacement is either recorded in the frame or, with ``physical_correction``,
    removed by a second ``|+>_e`` electron at ``g = -a_x/4``.
    """
    _check_register(code, n_modes)
    ff = {"0": (), "1": pauli_steps(code, "Z", 1, sign=-1)}
    steps = [NewElectron("+")]
    for m in range(1, n_modes + 1):
        steps += [ElectronGate("H"), Interact(code.a_x / 4, m), ElectronGate("H")]
    steps += [ElectronGate("H"), MeasureElectron("Z", ff)]
    if physical_correction:
        steps += correction_pass(code, n_modes, -code.a_x / 4)
    else:
        steps += [FrameShift(m, code.a_x / 4) for m in range(1, n_modes + 1)]
    return Schedule(tuple(steps), n_modes, code, f"ghz{n_modes}")


def compile_cluster1d(code: GkpCode, n_modes: int = 3) -> Schedule:
    """Linear cluster: ``a_x/4`` passes separated by electron Hadamards, then a Z measurement."""
    _check_register(code, n_modes)
    ff = {"0": (), "1": pauli_steps(code, "Z", n_modes, sign=-1)}
    steps = [NewElectron("0")]
    for m in range(1, n_modes + 1):
        if m > 1:
            steps.append(ElectronGate("H"))
        steps.append(Interact(code.a_x / 4, m))
    steps.append(MeasureElectron("Z", ff))
    steps += [FrameShift(m, code.a_x / 4) for m in range(1, n_modes + 1)]
    return Schedule(tuple(steps), n_modes, code, f"cluster{n_modes}")

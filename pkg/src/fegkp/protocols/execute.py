"""Schedule execution by branch enumeration or seeded sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import electron as el
from ..errors import DegenerateBranchError, InputError, ScheduleValidationError
from ..fock import FockSpace, _check_amplitude, displacement_array
from ..gkp import hadamard_rotation
from ..interaction import apply_cd, apply_on_axis
from ..linalg import StateVector
from .schedule import (
    ElectronGate, FrameShift, HadamardFrame, Interact, LaserDisplace, MeasureElectron, NewElectron, Rotate, Schedule,
)

_INITIAL = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}


@dataclass(frozen=True)
class ModeFrame:
    """Pending correction on one mode: logical state is ``U^quarter_turns D(-delta)`` applied to the simulated one."""

    delta: complex = 0j
    quarter_turns: int = 0


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """One measurement history. ``leakage`` is the norm lost to Fock truncation along it;
    branch probabilities are renormalised so they always sum to one."""

    outcomes: tuple
    probability: float
    final_state: StateVector
    frame: tuple
    leakage: float = 0.0

    def logical_state(self) -> StateVector:
        """Final state with every mode's frame undone, renormalised after the truncated displacements."""
        psi = self.final_state.tensor()
        for axis, fr in enumerate(self.frame):
            n = psi.shape[axis]
            if fr.delta != 0:
                psi = apply_on_axis(psi, displacement_array(n, -fr.delta), axis)
            if fr.quarter_turns:
                psi = apply_on_axis(psi, np.diag(hadamard_rotation(n, fr.quarter_turns)), axis)
        return StateVector(self.final_state.dims, psi / np.linalg.norm(psi))

    def same_as(self, other: "TrajectoryRecord") -> bool:
        """Bit-level equality (used by determinism checks)."""
        return (self.outcomes == other.outcomes and self.probability == other.probability
                and self.frame == other.frame
                and np.array_equal(self.final_state.amps, other.final_state.amps))


class _Run:
    def __init__(self, schedule: Schedule, frames: str, rng):
        if frames not in ("track", "explicit"):
            raise InputError(f"frames must be 'track' or 'explicit', got {frames!r}")
        self.schedule = schedule
        self.explicit = frames == "explicit"
        self.rng = rng
        self.records = []

    # Tensor layout: (electron?, mode 1, ..., mode M); `e` is 1 when an electron axis is present.
    def _axis(self, mode: int, e: int) -> int:
        return mode - 1 + e

    def _displace(self, psi, mode, e, alpha):
        n = psi.shape[self._axis(mode, e)]
        _check_amplitude(FockSpace(n, 0), alpha)
        return apply_on_axis(psi, displacement_array(n, alpha), self._axis(mode, e))

    def _rotate(self, psi, mode, e, q):
        n = psi.shape[self._axis(mode, e)]
        return apply_on_axis(psi, np.diag(hadamard_rotation(n, q)), self._axis(mode, e))

    def run(self, steps, psi, e, frame, outcomes, prob, kept=1.0):
        frame = list(frame)
        for i, step in enumerate(steps):
            if isinstance(step, NewElectron):
                psi = np.multiply.outer(_INITIAL[step.initial], psi)
                e = 1
            elif isinstance(step, Interact):
                g = step.g * 1j ** frame[step.mode - 1].quarter_turns
                n = psi.shape[self._axis(step.mode, e)]
                _check_amplitude(FockSpace(n, 0), g, "interaction")
                psi = apply_cd(psi, g, step.mode)
            elif isinstance(step, ElectronGate):
                psi = apply_on_axis(psi, el.gate_array(step.axis, step.angle), 0)
            elif isinstance(step, LaserDisplace):
                psi = self._displace(psi, step.mode, e, step.alpha * 1j ** frame[step.mode - 1].quarter_turns)
            elif isinstance(step, FrameShift):
                fr = frame[step.mode - 1]
                shift = step.delta * 1j ** fr.quarter_turns
                if self.explicit:
                    psi = self._displace(psi, step.mode, e, -shift)
                else:
                    frame[step.mode - 1] = ModeFrame(fr.delta + shift, fr.quarter_turns)
            elif isinstance(step, HadamardFrame):
                modes = range(1, len(frame) + 1) if step.mode is None else (step.mode,)
                for m in modes:
                    if self.explicit:
                        psi = self._rotate(psi, m, e, step.quarter_turns)
                    else:
                        fr = frame[m - 1]
                        frame[m - 1] = ModeFrame(fr.delta, (fr.quarter_turns + step.quarter_turns) % 4)
            elif isinstance(step, Rotate):
                psi = self._rotate(psi, step.mode, e, step.quarter_turns)
                fr = frame[step.mode - 1]
                frame[step.mode - 1] = ModeFrame(fr.delta * (-1j) ** step.quarter_turns, fr.quarter_turns)
            elif isinstance(step, MeasureElectron):
                rest = steps[i + 1:]
                kept *= float(np.vdot(psi, psi).real)
                branches = el.project_electron(psi, step.basis)
                if self.rng is not None:
                    total = sum(b.probability for b in branches)
                    pick = branches[0] if self.rng.random() < branches[0].probability / total else branches[1]
                    if pick.state is None:
                        raise DegenerateBranchError(f"sampled branch {pick.outcome!r} is degenerate")
                    branches = [pick]
                for b in branches:
                    if b.state is None:
                        continue
                    cont = tuple(step.continuation(b.outcome)) + tuple(rest)
                    self.run(cont, b.state, 0, frame, outcomes + (b.outcome,), prob * b.probability, kept)
                return
            else:
                raise ScheduleValidationError(f"unknown step {step!r}")
        kept *= float(np.vdot(psi, psi).real)
        psi = psi / math.sqrt(float(np.vdot(psi, psi).real))
        self.records.append(TrajectoryRecord(tuple(outcomes), float(prob), StateVector(psi.shape, psi), tuple(frame),
                                             1.0 - kept))


def execute(schedule: Schedule, initial: StateVector, mode: str = "enumerate", seed=None,
            frames: str = "track") -> list[TrajectoryRecord]:
    """Run a schedule on a photonic register.

    ``mode="enumerate"`` returns every branch with nonzero probability, ordered
    depth-first (outcome-lexicographic in basis order). ``mode="sample"`` draws a
    single trajectory from ``numpy.random.default_rng(seed)``; ``seed`` may also
    be a ``Generator``. ``frames="explicit"`` applies frame corrections and
    Hadamard frames as physical operations instead of bookkeeping.
    """
    if len(initial.dims) != schedule.n_modes:
        raise InputError(f"initial state has {len(initial.dims)} modes, schedule needs {schedule.n_modes}")
    if mode == "enumerate":
        rng = None
    elif mode == "sample":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    else:
        raise InputError(f"mode must be 'enumerate' or 'sample', got {mode!r}")
    runner = _Run(schedule, frames, rng)
    start = (ModeFrame(),) * schedule.n_modes
    runner.run(schedule.steps, initial.tensor().copy(), 0, start, (), 1.0)
    return runner.records


def outcome_probabilities(records) -> dict[str, float]:
    """Total probability per outcome string (outcomes joined with ``,``)."""
    out: dict[str, float] = {}
    for r in records:
        key = ",".join(r.outcomes)
        out[key] = out.get(key, 0.0) + r.probability
    return out

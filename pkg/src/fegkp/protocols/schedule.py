"""Schedule steps and their JSON form."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from ..electron import basis_bras
from ..errors import InputError, ScheduleValidationError
from ..fock import FockSpace
from ..gkp import GkpCode

ELECTRON_INITIAL = ("0", "1", "+", "-")
SCHEMA_VERSION = 1


def _mode(mode) -> int:
    if int(mode) != mode or mode < 1:
        raise ScheduleValidationError(f"mode index must be a positive integer, got {mode!r}")
    return int(mode)


@dataclass(frozen=True)
class NewElectron:
    initial: str = "0"

    def __post_init__(self):
        if self.initial not in ELECTRON_INITIAL:
            raise ScheduleValidationError(f"electron initial state must be one of {ELECTRON_INITIAL}")


@dataclass(frozen=True)
class Interact:
    """Conditional displacement ``CD(g)`` between the electron and ``mode``."""

    g: complex
    mode: int = 1

    def __post_init__(self):
        object.__setattr__(self, "g", complex(self.g))
        object.__setattr__(self, "mode", _mode(self.mode))


@dataclass(frozen=True)
class ElectronGate:
    """``H``, or a rotation about ``X`` (PINEM) / ``Z`` (drift) by ``angle``."""

    axis: str
    angle: float = 0.0

    def __post_init__(self):
        if self.axis not in ("H", "X", "Z"):
            raise ScheduleValidationError(f"electron gate axis must be H, X or Z, got {self.axis!r}")
        object.__setattr__(self, "angle", float(self.angle))


@dataclass(frozen=True)
class MeasureElectron:
    """Measure in the Z basis (``"Z"``) or the ``|phi +->`` basis (a float).

    ``feedforward`` maps every outcome label to the steps run right after it.
    """

    basis: Union[str, float]
    feedforward: tuple = ()

    def __post_init__(self):
        basis = self.basis if isinstance(self.basis, str) else float(self.basis)
        try:
            labels, _ = basis_bras(basis)
        except InputError as exc:
            raise ScheduleValidationError(str(exc)) from None
        ff = dict(self.feedforward) if not isinstance(self.feedforward, dict) else self.feedforward
        if set(ff) != set(labels):
            raise ScheduleValidationError(
                f"feedforward must cover exactly the outcomes {labels}, got {sorted(ff)}"
            )
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "feedforward", tuple((k, tuple(ff[k])) for k in labels))

    def continuation(self, outcome: str) -> tuple:
        return dict(self.feedforward)[outcome]


@dataclass(frozen=True)
class LaserDisplace:
    """Unconditional displacement ``D(alpha)`` of one mode."""

    mode: int
    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "mode", _mode(self.mode))
        object.__setattr__(self, "alpha", complex(self.alpha))


@dataclass(frozen=True)
class FrameShift:
    """Record that ``mode`` carries an extra ``D(delta)`` to be undone in post-processing."""

    mode: int
    delta: complex

    def __post_init__(self):
        object.__setattr__(self, "mode", _mode(self.mode))
        object.__setattr__(self, "delta", complex(self.delta))


@dataclass(frozen=True)
class HadamardFrame:
    """Logical H by bookkeeping: later couplings on the mode pick up a factor ``i^quarter_turns``.

    ``mode=None`` applies to every mode.
    """

    mode: int | None = None
    quarter_turns: int = 1

    def __post_init__(self):
        if self.mode is not None:
            object.__setattr__(self, "mode", _mode(self.mode))
        object.__setattr__(self, "quarter_turns", int(self.quarter_turns) % 4)


@dataclass(frozen=True)
class Rotate:
    """Physical phase-space rotation ``exp(-i pi n q / 2)`` of one mode."""

    mode: int
    quarter_turns: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", _mode(self.mode))
        object.__setattr__(self, "quarter_turns", int(self.quarter_turns) % 4)


Step = Union[NewElectron, Interact, ElectronGate, MeasureElectron, LaserDisplace, FrameShift, HadamardFrame, Rotate]
STEP_TYPES = {cls.__name__: cls for cls in
              (NewElectron, Interact, ElectronGate, MeasureElectron, LaserDisplace, FrameShift, HadamardFrame, Rotate)}


def _check_steps(steps, n_modes: int, in_flight: bool) -> bool:
    """Walk steps (recursing into feedforward); return whether an electron is in flight at the end."""
    for step in steps:
        if not isinstance(step, tuple(STEP_TYPES.values())):
            raise ScheduleValidationError(f"unknown step {step!r}")
        mode = getattr(step, "mode", None)
        if mode is not None and mode > n_modes:
            raise ScheduleValidationError(f"{type(step).__name__} targets mode {mode} of {n_modes}")
        if isinstance(step, NewElectron):
            if in_flight:
                raise ScheduleValidationError("NewElectron before the previous electron was measured")
            in_flight = True
        elif isinstance(step, (Interact, ElectronGate)):
            if not in_flight:
                raise ScheduleValidationError(f"{type(step).__name__} with no electron in flight")
        elif isinstance(step, MeasureElectron):
            if not in_flight:
                raise ScheduleValidationError("MeasureElectron with no electron in flight")
            for _, cont in step.feedforward:
                if _check_steps(cont, n_modes, False):
                    raise ScheduleValidationError("feedforward leaves an electron in flight")
            in_flight = False
    return in_flight


@dataclass(frozen=True)
class Schedule:
    steps: tuple
    n_modes: int = 1
    code: GkpCode | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ScheduleValidationError(f"schedule needs at least one mode, got {self.n_modes}")
        object.__setattr__(self, "steps", tuple(self.steps))
        if _check_steps(self.steps, self.n_modes, False):
            raise ScheduleValidationError("schedule ends with an electron in flight")

    def __add__(self, other: "Schedule") -> "Schedule":
        return Schedule(self.steps + other.steps, max(self.n_modes, other.n_modes), self.code or other.code,
                        "+".join(n for n in (self.name, other.name) if n))


# --- JSON --------------------------------------------------------------------

def _cplx(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _uncplx(v) -> complex:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise ScheduleValidationError(f"complex numbers are [re, im] pairs, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def step_to_dict(step) -> dict:
    d = {"op": type(step).__name__}
    if isinstance(step, NewElectron):
        d["initial"] = step.initial
    elif isinstance(step, Interact):
        d.update(g=_cplx(step.g), mode=step.mode)
    elif isinstance(step, ElectronGate):
        d.update(axis=step.axis, angle=step.angle)
    elif isinstance(step, MeasureElectron):
        d["basis"] = step.basis
        d["feedforward"] = {k: [step_to_dict(s) for s in v] for k, v in step.feedforward}
    elif isinstance(step, LaserDisplace):
        d.update(mode=step.mode, alpha=_cplx(step.alpha))
    elif isinstance(step, FrameShift):
        d.update(mode=step.mode, delta=_cplx(step.delta))
    elif isinstance(step, (HadamardFrame, Rotate)):
        d.update(mode=step.mode, quarter_turns=step.quarter_turns)
    return d


def step_from_dict(d: dict):
    d = dict(d)
    op = d.pop("op", None)
    if op not in STEP_TYPES:
        raise ScheduleValidationError(f"unknown step op {op!r}")
    for key in ("g", "alpha", "delta"):
        if key in d:
            d[key] = _uncplx(d[key])
    if op == "MeasureElectron" and "feedforward" in d:
        d["feedforward"] = {k: tuple(step_from_dict(s) for s in v) for k, v in d["feedforward"].items()}
    try:
        return STEP_TYPES[op](**d)
    except TypeError as exc:
        raise ScheduleValidationError(f"bad fields for {op}: {exc}") from None


def code_to_dict(code: GkpCode) -> dict:
    return {"a_x": _cplx(code.a_x), "a_z": _cplx(code.a_z), "delta": code.delta,
            "cutoff": code.fock.cutoff, "guard": code.fock.guard}


def code_from_dict(d: dict) -> GkpCode:
    a_x, a_z = _uncplx(d["a_x"]), _uncplx(d["a_z"])
    return GkpCode(a_x, a_x + a_z, a_z, float(d["delta"]), FockSpace(int(d["cutoff"]), int(d["guard"])))


def schedule_to_json(schedule: Schedule) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": schedule.name,
        "n_modes": schedule.n_modes,
        "code": None if schedule.code is None else code_to_dict(schedule.code),
        "steps": [step_to_dict(s) for s in schedule.steps],
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def schedule_from_json(text: str) -> Schedule:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ScheduleValidationError(f"unsupported schedule schema {doc.get('schema_version')!r}")
    code = None if doc.get("code") is None else code_from_dict(doc["code"])
    steps = tuple(step_from_dict(s) for s in doc["steps"])
    return Schedule(steps, int(doc["n_modes"]), code, doc.get("name", ""))


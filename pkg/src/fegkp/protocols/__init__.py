"""Protocol schedules: compile logical operations to electron passes and execute them."""
from .compile import (
    compile_cluster1d, compile_cnot2, compile_ghz, compile_pauli, compile_readout, compile_rotation,
    correction_pass, pauli_steps,
)
from .execute import ModeFrame, TrajectoryRecord, execute, outcome_probabilities
from .schedule import (
    ElectronGate, FrameShift, HadamardFrame, Interact, LaserDisplace, MeasureElectron, NewElectron, Rotate,
    Schedule, schedule_from_json, schedule_to_json,
)

__all__ = [
    "compile_cluster1d", "compile_cnot2", "compile_ghz", "compile_pauli", "compile_readout", "compile_rotation",
    "correction_pass", "pauli_steps", "ModeFrame", "TrajectoryRecord", "execute", "outcome_probabilities",
    "ElectronGate", "FrameShift", "HadamardFrame", "Interact", "LaserDisplace", "MeasureElectron", "NewElectron",
    "Rotate", "Schedule", "schedule_from_json", "schedule_to_json",
]

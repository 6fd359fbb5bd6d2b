"""Dense complex linear algebra on composite Hilbert spaces.

Subsystem ordering is global: the electron (when present) is subsystem 0 and
photonic modes follow. Tensor products use the leftmost-slowest convention,
the same as ``numpy.kron``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionBudgetError, InputError

#: Upper bound on the bytes a single dense object may occupy.
MEMORY_BUDGET_BYTES = 2 * 1024**3

_COMPLEX_BYTES = np.dtype(np.complex128).itemsize


def check_budget(n_elements: int, what: str = "array") -> None:
    """Raise :class:`DimensionBudgetError` if ``n_elements`` complex numbers do not fit."""
    required = int(n_elements) * _COMPLEX_BYTES
    if required > MEMORY_BUDGET_BYTES:
        raise DimensionBudgetError(
            f"{what} needs {required / 1024**2:.1f} MiB, budget is "
            f"{MEMORY_BUDGET_BYTES / 1024**2:.1f} MiB",
            required_bytes=required,
            budget_bytes=MEMORY_BUDGET_BYTES,
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square matrix acting on ``prod(dims)`` dimensional space."""

    dims: tuple
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InputError(f"invalid subsystem dims {self.dims!r}")
        side = math.prod(dims)
        data = np.asarray(self.data)
        if data.shape != (side, side):
            raise InputError(f"operator data has shape {data.shape}, dims {dims} need {(side, side)}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", _frozen(data))

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _match_dims(self.dims, other.dims)
            return Operator(self.dims, self.data @ other.data)
        if isinstance(other, StateVector):
            _match_dims(self.dims, other.dims)
            return StateVector(other.dims, self.data @ other.amps)
        return NotImplemented

    def dag(self) -> "Operator":
        return Operator(self.dims, self.data.conj().T)

    def is_unitary(self, tol: float = 1e-9, block: int | None = None) -> bool:
        """Check ``U^dag U = I``, optionally on the leading ``block`` rows/columns only.

        With a block the test uses the columns ``[:block]`` of the full matrix, so
        leakage out of the trusted block shows up as a norm deficit.
        """
        u = self.data
        if block is None:
            return bool(np.abs(u.conj().T @ u - np.eye(self.size)).max() <= tol)
        cols = u[:, :block]
        return bool(np.abs(cols.conj().T @ cols - np.eye(block)).max() <= tol)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "Operator":
        return cls(tuple(dims), np.eye(math.prod(dims)))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state with declared subsystem dimensions."""

    dims: tuple
    amps: np.ndarray
    norm_tol: float = 1e-10

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InputError(f"invalid subsystem dims {self.dims!r}")
        amps = np.asarray(self.amps).reshape(-1)
        if amps.shape[0] != math.prod(dims):
            raise InputError(f"{amps.shape[0]} amplitudes do not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", _frozen(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self) -> bool:
        return abs(self.norm() - 1.0) <= self.norm_tol

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise InputError("cannot normalize the zero vector")
        return StateVector(self.dims, self.amps / nrm, self.norm_tol)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem (read-only view)."""
        return self.amps.reshape(self.dims)

    def density(self) -> Operator:
        return Operator(self.dims, np.outer(self.amps, self.amps.conj()))

    @classmethod
    def basis(cls, dims: Sequence[int], index: Sequence[int] | int) -> "StateVector":
        dims = tuple(dims)
        amps = np.zeros(math.prod(dims), dtype=complex)
        flat = index if isinstance(index, (int, np.integer)) else np.ravel_multi_index(tuple(index), dims)
        amps[flat] = 1.0
        return cls(dims, amps)


State = Union[StateVector, Operator]


def _match_dims(a, b):
    if tuple(a) != tuple(b):
        raise InputError(f"dimension mismatch: {tuple(a)} vs {tuple(b)}")


def kron(a: Operator, b: Operator) -> Operator:
    """Tensor product, leftmost factor slowest."""
    side = a.size * b.size
    check_budget(side * side, "kron result")
    return Operator(a.dims + b.dims, np.kron(a.data, b.data))


def kron_states(a: StateVector, b: StateVector) -> StateVector:
    check_budget(a.amps.size * b.amps.size, "state tensor product")
    return StateVector(a.dims + b.dims, np.kron(a.amps, b.amps))


# Higham (2005) scaling-and-squaring Pade table: degree -> max 1-norm.
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}


def _pade_uv(a: np.ndarray, m: int):
    c = _PADE[m]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    if m < 13:
        powers = [ident, a2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ a2)
        u = sum(c[j] * powers[j // 2] for j in range(m, 0, -2))
        v = sum(c[j] * powers[j // 2] for j in range(m - 1, -1, -2))
        return a @ u, v
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (c[13] * a6 + c[11] * a4 + c[9] * a2)
             + c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * ident)
    v = (a6 @ (c[12] * a6 + c[10] * a4 + c[8] * a2)
         + c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * ident)
    return u, v


def expm_array(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square array by scaling and squaring.

    Uses the degree 3..13 diagonal Pade approximants with the 1-norm
    thresholds of Higham (2005), giving backward error below unit roundoff.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"matexp needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matexp input has non-finite entries")
    norm1 = np.abs(a).sum(axis=0).max() if a.size else 0.0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            u, v = _pade_uv(a, m)
            return np.linalg.solve(v - u, v + u)
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA[13])))) if norm1 > _THETA[13] else 0
    u, v = _pade_uv(a / 2.0**s, 13)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def matexp(m: Operator) -> Operator:
    """``exp(M)`` for an :class:`Operator`."""
    return Operator(m.dims, expm_array(m.data))


def partial_trace(x: State, keep: Iterable[int]) -> Operator:
    """Reduced density operator on the subsystems listed in ``keep``.

    The kept subsystems retain their original relative order.
    """
    keep = sorted(set(int(k) for k in keep))
    dims = x.dims
    if not keep:
        raise InputError("partial_trace needs a non-empty keep set")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise InputError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    drop = [i for i in range(len(dims)) if i not in keep]
    kdims = tuple(dims[i] for i in keep)
    kside = math.prod(kdims)
    if isinstance(x, StateVector):
        psi = np.moveaxis(x.tensor(), keep, range(len(keep))).reshape(kside, -1)
        return Operator(kdims, psi @ psi.conj().T)
    n = len(dims)
    rho = x.data.reshape(dims + dims)
    for j, i in enumerate(sorted(drop, reverse=True)):
        cur = n - j
        rho = np.trace(rho, axis1=i, axis2=i + cur)
    return Operator(kdims, rho.reshape(kside, kside))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(x: State, y: State) -> float:
    """State fidelity in the squared convention (pure/pure gives ``|<x|y>|^2``)."""
    _match_dims(x.dims, y.dims)
    if isinstance(x, StateVector) and isinstance(y, StateVector):
        val = abs(np.vdot(x.amps, y.amps)) ** 2
    elif isinstance(x, StateVector):
        val = np.real(np.vdot(x.amps, y.data @ x.amps))
    elif isinstance(y, StateVector):
        val = np.real(np.vdot(y.amps, x.data @ y.amps))
    else:
        sx = _psd_sqrt(x.data)
        inner = _psd_sqrt(sx @ y.data @ sx)
        val = np.real(np.trace(inner)) ** 2
    return float(min(max(val, 0.0), 1.0))

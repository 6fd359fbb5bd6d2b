"""Single-mode truncated Fock space.

Quadrature convention: ``q = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``,
so ``[q, p] = i`` and ``D(alpha)`` shifts ``(q, p)`` by ``sqrt(2) (Re alpha, Im alpha)``.
"""
from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, TruncationError
from .linalg import Operator, StateVector, expm_array


# sqrt(m!/n!) factors leave the double range beyond this
MAX_CUTOFF = 300


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode space of dimension ``cutoff``.

    Operators are only trusted on the leading ``cutoff - guard`` block.
    """

    cutoff: int
    guard: int | None = None

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or not 4 <= self.cutoff <= MAX_CUTOFF:
            raise InputError(f"cutoff must be an integer in [4, {MAX_CUTOFF}], got {self.cutoff}")
        guard = self.cutoff // 5 if self.guard is None else int(self.guard)
        if guard < 0 or guard >= self.cutoff / 2:
            raise InputError(f"guard band {guard} must be in [0, cutoff/2)")
        object.__setattr__(self, "cutoff", int(self.cutoff))
        object.__setattr__(self, "guard", guard)

    @property
    def trusted(self) -> int:
        return self.cutoff - self.guard


def _ladder_array(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def annihilation(space: FockSpace) -> Operator:
    return Operator((space.cutoff,), _ladder_array(space.cutoff))


def creation(space: FockSpace) -> Operator:
    return Operator((space.cutoff,), _ladder_array(space.cutoff).T)


def number(space: FockSpace) -> Operator:
    return Operator((space.cutoff,), np.diag(np.arange(space.cutoff, dtype=complex)))


def parity_diag(n: int) -> np.ndarray:
    return (-1.0) ** np.arange(n)


def parity(space: FockSpace) -> Operator:
    return Operator((space.cutoff,), np.diag(parity_diag(space.cutoff)).astype(complex))


def rotation_diag(n: int, theta: float) -> np.ndarray:
    """Diagonal of the phase-space rotation ``exp(i theta a^dag a)``."""
    return np.exp(1j * theta * np.arange(n))


def rotation(space: FockSpace, theta: float) -> Operator:
    return Operator((space.cutoff,), np.diag(rotation_diag(space.cutoff, theta)))


def _laguerre_table(n: int, x: np.ndarray) -> np.ndarray:
    """``L[..., j, k] = L_j^{(k)}(x)`` for ``j, k < n`` via the three-term recurrence in ``j``."""
    x = np.asarray(x, dtype=float)[..., None]
    k = np.arange(n, dtype=float)
    table = np.empty(x.shape[:-1] + (n, n))
    table[..., 0, :] = 1.0
    if n > 1:
        table[..., 1, :] = 1.0 + k - x
    for j in range(1, n - 1):
        table[..., j + 1, :] = ((2 * j + 1 + k - x) * table[..., j, :]
                                - (j + k) * table[..., j - 1, :]) / (j + 1)
    return table


@functools.lru_cache(maxsize=None)
def _index_grids(n: int):
    m = np.arange(n)[:, None]
    col = np.arange(n)[None, :]
    lo = np.minimum(m, col)
    hi = np.maximum(m, col)
    k = hi - lo
    lgam = np.array([math.lgamma(i + 1) for i in range(n)])
    ratio = np.exp(0.5 * (lgam[lo] - lgam[hi]))
    lower = m >= col
    return lo, k, ratio, lower


def displacement_batch(n: int, alphas) -> np.ndarray:
    """Analytic ``<m|D(alpha)|n>`` for a batch of amplitudes, shape ``(len(alphas), n, n)``.

    ``<m|D|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)`` for
    ``m >= n``, and the mirrored expression with ``-conj(alpha)`` above the diagonal.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    x = np.abs(alphas) ** 2
    lag = _laguerre_table(n, x)
    lo, k, ratio, lower = _index_grids(n)
    # powers alpha^k (below diagonal) and (-conj alpha)^k (above), one row per point
    pw = np.ones((alphas.size, 2, n), dtype=complex)
    if n > 1:
        steps = np.stack([alphas, -np.conj(alphas)], axis=1)[:, :, None]
        with np.errstate(under="ignore"):
            pw[:, :, 1:] = np.cumprod(np.broadcast_to(steps, (alphas.size, 2, n - 1)), axis=2)
    side = np.where(lower, 0, 1)
    with np.errstate(under="ignore"):
        env = np.exp(-x / 2)[:, None, None]
        return (env * ratio) * pw[:, side, k] * lag[:, lo, k]


@functools.lru_cache(maxsize=1024)
def _displacement_cached(n: int, alpha: complex) -> np.ndarray:
    d = displacement_batch(n, [alpha])[0]
    d.setflags(write=False)
    return d


def displacement_array(n: int, alpha: complex) -> np.ndarray:
    """Read-only analytic displacement matrix, cached per ``(n, alpha)``."""
    return _displacement_cached(int(n), complex(alpha))


def _check_amplitude(space: FockSpace, alpha: complex, what: str = "displacement") -> None:
    energy = abs(alpha) ** 2
    if energy > space.cutoff / 2:
        need = int(math.ceil(4 * energy))
        raise TruncationError(
            f"{what} with |alpha|^2 = {energy:.3g} needs cutoff >= {need} (have {space.cutoff})",
            required_cutoff=need,
        )
    if energy > space.cutoff / 4:
        warnings.warn(
            f"{what} with |alpha|^2 = {energy:.3g} is close to the cutoff {space.cutoff}",
            RuntimeWarning,
            stacklevel=3,
        )


def displacement(space: FockSpace, alpha: complex) -> Operator:
    """Displacement operator from the closed-form Laguerre matrix elements."""
    _check_amplitude(space, alpha)
    return Operator((space.cutoff,), displacement_array(space.cutoff, alpha))


def displacement_expm(space: FockSpace, alpha: complex, pad: int | None = None) -> Operator:
    """Displacement from ``matexp(alpha a^dag - conj(alpha) a)``.

    The generator is built ``pad`` levels above the cutoff and the result cut back,
    which removes the reflection artefacts a hard-truncated generator introduces
    near the top of the space. ``pad=0`` gives the plain truncated exponential.
    """
    if pad is None:
        pad = max(20, space.cutoff // 2)
    n = space.cutoff + int(pad)
    a = _ladder_array(n)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return Operator((space.cutoff,), expm_array(gen)[: space.cutoff, : space.cutoff])


def coherent_amplitudes(n: int, alpha: complex) -> np.ndarray:
    idx = np.arange(n)
    lgam = np.array([math.lgamma(i + 1) for i in idx])
    if alpha == 0:
        out = np.zeros(n, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -abs(alpha) ** 2 / 2 + idx * math.log(abs(alpha)) - 0.5 * lgam
    return np.exp(logmag) * np.exp(1j * idx * np.angle(alpha))


def coherent_state(space: FockSpace, alpha: complex) -> StateVector:
    _check_amplitude(space, alpha, "coherent state")
    amps = coherent_amplitudes(space.cutoff, alpha)
    return StateVector((space.cutoff,), amps / np.linalg.norm(amps))


def fock_state(space: FockSpace, n: int) -> StateVector:
    return StateVector.basis((space.cutoff,), n)


def hermite_functions(n: int, x) -> np.ndarray:
    """Normalized Hermite functions ``h_j(x) = <x|j>`` for ``j < n``, shape ``(n, len(x))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.zeros((n, x.size))
    h[0] = np.pi ** -0.25 * np.exp(-x**2 / 2)
    if n > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for j in range(1, n - 1):
        h[j + 1] = math.sqrt(2.0 / (j + 1)) * x * h[j] - math.sqrt(j / (j + 1)) * h[j - 1]
    return h


# exp(-x^2/2) underflows past this, taking every recurrence term with it
_HERMITE_XMAX = 37.0


def quadrature_basis(n: int, theta: float, x) -> np.ndarray:
    """``<x_theta|j>`` for the rotated quadrature ``x_theta = (a e^{-i theta} + a^dag e^{i theta})/sqrt 2``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size and np.abs(x).max() > _HERMITE_XMAX:
        warnings.warn(
            f"quadrature grid reaches |x| = {np.abs(x).max():.1f}; Hermite functions underflow beyond {_HERMITE_XMAX}",
            RuntimeWarning,
            stacklevel=3,
        )
    return hermite_functions(n, x).T * np.exp(-1j * theta * np.arange(n))[None, :]


def quadrature_wavefunction(psi: StateVector, theta: float, grid) -> np.ndarray:
    """Position-like wavefunction ``<x_theta|psi>`` on ``grid``."""
    if len(psi.dims) != 1:
        raise InputError("quadrature_wavefunction takes a single-mode state")
    return quadrature_basis(psi.dims[0], theta, grid) @ psi.amps


def _check_density(rho: Operator) -> np.ndarray:
    data = rho.data
    if np.abs(data - data.conj().T).max() > 1e-8:
        raise InputError("density operator is not Hermitian")
    tr = np.real(np.trace(data))
    if abs(tr - 1) > 1e-8:
        raise InputError(f"density operator has trace {tr:.3g}")
    return data


# exp(|beta|^2/2) growth of the Laguerre table overflows past this
_WIGNER_MAX_ENERGY = 1200.0


def wigner(rho, xvec, yvec, batch: int = 256) -> np.ndarray:
    """Wigner function on the grid ``alpha = x + i y`` via displaced parity.

    ``W(alpha) = (2/pi) Tr[D(alpha) P D(alpha)^dag rho] = (2/pi) Tr[rho D(2 alpha) P]``,
    normalized so the integral over ``d Re(alpha) d Im(alpha)`` is one. The trace
    only touches matrix elements inside the support of ``rho``, so the result is
    exact for the truncated state. Returns ``W[iy, ix]``; accepts a
    :class:`StateVector` or a density :class:`Operator`.
    """
    if len(rho.dims) != 1:
        raise InputError("wigner takes a single-mode state")
    if isinstance(rho, StateVector):
        data = np.outer(rho.amps, rho.amps.conj())
    else:
        data = _check_density(rho)
    n = rho.dims[0]
    xvec = np.asarray(xvec, dtype=float)
    yvec = np.asarray(yvec, dtype=float)
    betas = 2 * (xvec[None, :] + 1j * yvec[:, None]).ravel()
    if betas.size and (np.abs(betas) ** 2).max() > _WIGNER_MAX_ENERGY:
        raise InputError("Wigner grid too far from the origin for the Laguerre evaluation")

    # <m|D(beta)|n> = ratio * pw_k * env * L_lo^(k); sum rho_nm (-1)^n <m|D|n>
    sign = parity_diag(n)
    lower_w = np.zeros((n, n), dtype=complex)   # m = lo + k, n = lo
    upper_w = np.zeros((n, n), dtype=complex)   # m = lo, n = lo + k
    j = np.arange(n)[:, None]
    kk = np.arange(n)[None, :]
    valid = j + kk < n
    jj, kv = np.broadcast_to(j, (n, n))[valid], np.broadcast_to(kk, (n, n))[valid]
    r = np.exp(0.5 * np.array([math.lgamma(a + 1) - math.lgamma(a + b + 1) for a, b in zip(jj, kv)]))
    lower_w[valid] = data[jj, jj + kv] * sign[jj] * r
    upper_w[valid] = data[jj + kv, jj] * sign[jj + kv] * r
    upper_w[:, 0] = 0.0  # diagonal counted once

    out = np.empty(betas.size)
    kidx = np.arange(n)
    for start in range(0, betas.size, batch):
        b = betas[start:start + batch]
        x = np.abs(b) ** 2
        lag = _laguerre_table(n, x)
        s_low = np.einsum("pjk,jk->pk", lag, lower_w)
        s_up = np.einsum("pjk,jk->pk", lag, upper_w)
        with np.errstate(divide="ignore", under="ignore", invalid="ignore"):
            logmag = kidx[None, :] * np.log(np.abs(b))[:, None] - x[:, None] / 2
            logmag[:, 0] = -x / 2
            ph = np.angle(b)[:, None] * kidx[None, :]
            mag = np.exp(logmag)
        # upper side carries (-conj beta)^k
        up_phase = np.exp(1j * kidx[None, :] * (np.pi - np.angle(b)[:, None]))
        val = (s_low * mag * np.exp(1j * ph)).sum(1) + (s_up * mag * up_phase).sum(1)
        out[start:start + batch] = val.real
    return (2 / np.pi) * out.reshape(yvec.size, xvec.size)


def write_wigner_csv(path, w: np.ndarray, xvec, yvec) -> None:
    """CSV layout: header row holds the x values, first column the y values."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p\\q"] + [repr(float(v)) for v in xvec])
        for yv, row in zip(yvec, w):
            writer.writerow([repr(float(yv))] + [repr(float(v)) for v in row])


def read_wigner_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    xvec = np.array([float(v) for v in rows[0][1:]])
    yvec = np.array([float(r[0]) for r in rows[1:]])
    w = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return w, xvec, yvec

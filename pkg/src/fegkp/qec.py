"""Noise channels and electron-mediated stabilizer rounds.

A syndrome round couples a fresh ``|0>_e`` electron through ``CD(a_i/2)``. The
two electron branches then differ by the stabilizer ``D(a_i)``, so
``<Z_e> + i<Y_e> = <D(a_i)>`` and the stabilizer phase estimates the shift
error perpendicular to ``a_i``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import electron as el
from .errors import InputError
from .fock import displacement_array
from .gkp import GkpCode, gkp_state, logical_fidelity
from .interaction import apply_cd, apply_on_axis, conditional_displacement
from .linalg import Operator, StateVector, check_budget


@dataclass(frozen=True)
class NoiseSpec:
    """``kind="loss"`` with transmissivity ``eta``, or ``kind="displacement"`` with rms shift ``sigma``.

    Displacement noise draws ``D(eps)`` with ``Re eps`` and ``Im eps`` each of std
    ``sigma/2``: each quadrature moves by std ``sigma/sqrt 2`` and the rms length of
    the phase-space shift is ``sigma``. Then ``<D(beta)>`` decays by ``exp(-sigma^2 |beta|^2 / 2)``.
    """

    kind: str = "displacement"
    sigma: float = 0.0
    eta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("loss", "displacement"):
            raise InputError(f"noise kind must be 'loss' or 'displacement', got {self.kind!r}")
        if not (0 < self.eta <= 1):
            raise InputError(f"eta must be in (0, 1], got {self.eta}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InputError(f"sigma must be finite and >= 0, got {self.sigma}")


def sample_displacement(sigma: float, rng) -> complex:
    re, im = rng.normal(0.0, sigma / 2, size=2)
    return complex(re, im)


def loss_kraus(n: int, eta: float) -> np.ndarray:
    """Kraus operators ``K_k`` of the pure-loss channel, shape ``(n, n, n)``."""
    idx = np.arange(n)
    lgam = np.array([math.lgamma(i + 1) for i in range(n)])
    out = np.zeros((n, n, n), dtype=complex)
    if eta == 1:
        out[0] = np.eye(n)
        return out
    for k in range(n):
        m = idx[k:]
        logc = lgam[m] - lgam[k] - lgam[m - k]
        out[k, m - k, m] = np.exp(0.5 * logc + 0.5 * (m - k) * math.log(eta) + 0.5 * k * math.log1p(-eta))
    return out


def _displace_state(state, alpha: complex, axis: int = 0):
    if alpha == 0:
        return state
    if isinstance(state, StateVector):
        d = displacement_array(state.dims[axis], alpha)
        return StateVector(state.dims, apply_on_axis(state.tensor(), d, axis))
    dims = state.dims
    d = displacement_array(dims[axis], alpha)
    rho = state.data.reshape(dims + dims)
    rho = apply_on_axis(rho, d, axis)
    rho = apply_on_axis(rho, d.conj(), axis + len(dims))
    return Operator(dims, rho.reshape(state.data.shape))


def _apply_loss_density(rho: Operator, kraus: np.ndarray, axis: int) -> Operator:
    dims = rho.dims
    t = rho.data.reshape(dims + dims)
    out = np.zeros_like(t)
    for k in kraus:
        if not k.any():
            continue
        out += apply_on_axis(apply_on_axis(t, k, axis), k.conj(), axis + len(dims))
    return Operator(dims, out.reshape(rho.data.shape))


def apply_noise(state, noise: NoiseSpec, mode: int = 1, rng=None):
    """Apply one noise event to ``mode`` (1-based).

    Loss acts exactly on a density operator. A pure multi-mode state gets one
    Kraus branch sampled with ``rng`` instead; a pure single-mode state is
    promoted to a density operator unless ``rng`` is given. Displacement noise
    always samples ``eps`` from ``rng`` (default: ``noise.seed``).
    """
    if rng is None and (noise.kind == "displacement" or len(state.dims) > 1):
        rng = np.random.default_rng(noise.seed)
    axis = mode - 1
    if not 0 <= axis < len(state.dims):
        raise InputError(f"mode {mode} out of range for {len(state.dims)} modes")
    if noise.kind == "displacement":
        return _displace_state(state, sample_displacement(noise.sigma, rng), axis)
    n = state.dims[axis]
    kraus = loss_kraus(n, noise.eta)
    if isinstance(state, StateVector) and len(state.dims) == 1 and rng is None:
        state = state.density()
    if isinstance(state, Operator):
        return _apply_loss_density(state, kraus, axis)
    psi = state.tensor()
    branches = [apply_on_axis(psi, k, axis) for k in kraus]
    probs = np.array([np.vdot(b, b).real for b in branches])
    k = int(rng.choice(n, p=probs / probs.sum()))
    return StateVector(state.dims, branches[k] / math.sqrt(probs[k]))


def loss_branch_probabilities(state: StateVector, eta: float, mode: int = 1) -> np.ndarray:
    psi = state.tensor()
    kraus = loss_kraus(state.dims[mode - 1], eta)
    return np.array([np.vdot(b, b).real for b in (apply_on_axis(psi, k, mode - 1) for k in kraus)])


# --- syndrome rounds ---------------------------------------------------------

@dataclass(frozen=True)
class SyndromeResult:
    phase: float
    correction: complex
    state: object
    frame_update: complex = 0j
    z_mean: float = 1.0
    y_mean: float = 0.0


def _electron_statistics(state, g: complex):
    """``(<Z_e>, <Y_e>)`` after ``CD(g)`` on ``|0>_e (x) state``."""
    if isinstance(state, StateVector):
        joint = apply_cd(np.multiply.outer(np.array([1, 0], dtype=complex), state.tensor()), g, 1)
        bz = el.project_electron(joint, "Z")
        by = el.project_electron(joint, math.pi / 2)
        z = bz[0].probability - bz[1].probability
        # |pi/2 -> = (|0> + i|1>)/sqrt2 up to phase, the +1 eigenstate of sigma_y
        y = by[1].probability - by[0].probability
        return z, y
    n = state.dims[0]
    check_budget((2 * n) ** 2, "syndrome density")
    cd = conditional_displacement(g, _space(n)).data
    e0 = np.zeros((2, 2), dtype=complex)
    e0[0, 0] = 1
    joint = cd @ np.kron(e0, state.data) @ cd.conj().T
    red = np.einsum("aibi->ab", joint.reshape(2, n, 2, n))
    tr = red.trace().real
    return float((red[0, 0] - red[1, 1]).real / tr), float(2 * red[1, 0].imag / tr)


def _space(n):
    from .fock import FockSpace

    return FockSpace(n, 0)


def syndrome_round(state, code: GkpCode, axis: str = "Z", shots: int | None = None, rng=None) -> SyndromeResult:
    """Estimate the phase of the stabilizer ``D(a_axis)`` and shift the state back.

    ``axis="Z"`` measures ``D(a_z)`` and so corrects shifts along ``a_x`` (q errors
    on the square code). With ``shots=None`` the electron expectations are exact;
    otherwise each basis is sampled ``shots`` times from ``rng``. The estimate is
    ``theta = arg(<Z_e> + i<Y_e>) = arg<D(a)>``, the correction
    ``theta/(2|a|)`` along ``i a/|a|``, and its length is at most ``|a|/4``.
    Measurement back-action on the mode is not applied.
    """
    a = code.lattice(axis)
    z, y = _electron_statistics(state, a / 2)
    if shots is not None:
        if rng is None:
            raise InputError("finite-shot syndrome rounds need an rng")
        z = 2 * rng.binomial(shots, (1 + z) / 2) / shots - 1
        y = 2 * rng.binomial(shots, (1 + y) / 2) / shots - 1
    theta = math.atan2(y, z)
    corr = theta / (2 * abs(a)) * (1j * a / abs(a))
    cap = abs(a) / 4
    if abs(corr) > cap:
        corr *= cap / abs(corr)
    return SyndromeResult(theta, corr, _displace_state(state, corr), 0j, z, y)


# --- experiment harness -------------------------------------------------------

@dataclass
class QecTrace:
    rounds: list = field(default_factory=list)
    corrected_mean: list = field(default_factory=list)
    corrected_stderr: list = field(default_factory=list)
    uncorrected_mean: list = field(default_factory=list)
    uncorrected_stderr: list = field(default_factory=list)
    corrected: np.ndarray | None = None
    uncorrected: np.ndarray | None = None

    def separation(self, round_index: int = -1) -> float:
        """Gap between corrected and uncorrected means in combined standard errors."""
        gap = self.corrected_mean[round_index] - self.uncorrected_mean[round_index]
        se = math.hypot(self.corrected_stderr[round_index], self.uncorrected_stderr[round_index])
        return math.inf if se == 0 and gap > 0 else (gap / se if se > 0 else 0.0)

    def to_rows(self):
        return [
            {"round": r, "mean": m, "stderr": s, "uncorrected_mean": um, "uncorrected_stderr": us}
            for r, m, s, um, us in zip(self.rounds, self.corrected_mean, self.corrected_stderr,
                                       self.uncorrected_mean, self.uncorrected_stderr)
        ]

    def write_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["round", "mean", "stderr", "uncorrected_mean", "uncorrected_stderr"])
            w.writeheader()
            for row in self.to_rows():
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def _stats(x: np.ndarray):
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return mean, se


def qec_experiment(code: GkpCode, noise: NoiseSpec, rounds: int = 2, trials: int = 200, seed: int | None = None,
                   logical: str = "0", shots: int | None = None) -> QecTrace:
    """Noise then one syndrome round, ``rounds`` times, alternating ``Z`` (q) and ``X`` (p) stabilizers.

    Each trial draws from its own child of ``SeedSequence(seed)`` and evolves a
    corrected and an uncorrected copy under the same noise. Row 0 is the
    noise-free baseline.
    """
    if rounds < 1 or trials < 1:
        raise InputError("rounds and trials must be positive")
    seed = noise.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(trials)
    ref = gkp_state(code, logical)
    base = logical_fidelity(ref, code, logical)
    corr = np.empty((trials, rounds + 1))
    unc = np.empty((trials, rounds + 1))
    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        fixed = plain = ref
        corr[t, 0] = unc[t, 0] = base
        for r in range(rounds):
            if noise.kind == "loss":
                # one Kraus trajectory shared by both copies would not be meaningful; use the exact channel
                fixed = apply_noise(fixed, noise)
                plain = apply_noise(plain, noise)
            else:
                eps = sample_displacement(noise.sigma, rng)
                fixed = _displace_state(fixed, eps)
                plain = _displace_state(plain, eps)
            fixed = syndrome_round(fixed, code, "Z" if r % 2 == 0 else "X", shots, rng).state
            corr[t, r + 1] = logical_fidelity(fixed, code, logical)
            unc[t, r + 1] = logical_fidelity(plain, code, logical)
    trace = QecTrace(corrected=corr, uncorrected=unc)
    for r in range(rounds + 1):
        cm, cs = _stats(corr[:, r])
        um, us = _stats(unc[:, r])
        trace.rounds.append(r)
        trace.corrected_mean.append(cm)
        trace.corrected_stderr.append(cs)
        trace.uncorrected_mean.append(um)
        trace.uncorrected_stderr.append(us)
    return trace

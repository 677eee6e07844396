"""Split-step Floquet propagation in a truncated angular-momentum basis.

States live on momentum indices n in [-dim/2, dim/2) (dim a power of two).
One period applies the kick factor exp(-i K cos(theta)/hbar) *
exp(K lam sin(theta)/hbar) on a uniform theta grid over [-pi, pi), reached by
FFT, followed by the kinetic phase exp(-i hbar n^2 / 2) in the momentum
representation. Amplitudes are renormalized after every step; the log of the
pre-normalization norm accumulates in log_norm, so the stored vector always
has unit norm while the true norm is exp(log_norm). At lam = 0 the step is
unitary and log_norm stays at zero to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuantumState:
    """Unit-norm amplitudes over the momentum basis plus accumulated
    ln(norm). amps[j] is the amplitude at n = j - dim//2.
    """

    amps: np.ndarray
    log_norm: float = 0.0

    @property
    def dim(self) -> int:
        return self.amps.size


@dataclass(frozen=True)
class Observables:
    """Momentum moments of a state at one kick, computed over the
    normalized amplitudes (the norm divides out by construction).
    """

    mean_p: float
    mean_p2: float
    m2: float
    log_norm: float


@dataclass(frozen=True)
class ObservableSeries:
    """Per-kick observables (entry 0 is the initial state) plus any
    truncation warnings raised along the way: (kick, message) pairs.
    """

    entries: list[Observables]
    warnings: list[tuple[int, str]]


def _check_dim(dim: int):
    if dim < 2 or dim & (dim - 1) != 0:
        raise ValueError(f"basis size must be a power of two >= 2, got {dim}")


def n_values(dim: int) -> np.ndarray:
    """Momentum indices in stored (centered) order."""
    return np.arange(dim) - dim // 2


def theta_grid(dim: int) -> np.ndarray:
    """Uniform angle grid on [-pi, pi), dim points."""
    return -np.pi + 2.0 * np.pi * np.arange(dim) / dim


def _alternating(dim: int) -> np.ndarray:
    # e^{-i n pi} = (-1)^n relating the [-pi, pi) grid to the FFT's [0, 2pi)
    s = np.ones(dim)
    s[1::2] = -1.0
    return s


def to_angle(amps: np.ndarray, axis: int = -1) -> np.ndarray:
    """Amplitudes psi_n (centered order) -> samples psi(theta_k) on the grid.

    Convention: psi(theta_k) = sum_n psi_n e^{i n theta_k}, so a unit-norm
    amplitude vector gives sum_k |psi(theta_k)|^2 = dim.
    """
    dim = amps.shape[axis]
    alt = _alternating(dim)
    if axis in (0, -2) and amps.ndim == 2:
        alt = alt[:, None]
    return np.fft.ifft(np.fft.ifftshift(amps, axes=axis) * alt, axis=axis) * dim


def to_momentum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse of to_angle: grid samples -> centered amplitudes."""
    dim = values.shape[axis]
    alt = _alternating(dim)
    if axis in (0, -2) and values.ndim == 2:
        alt = alt[:, None]
    return np.fft.fftshift(np.fft.fft(values, axis=axis) / dim * alt, axes=axis)


@lru_cache(maxsize=32)
def _kernels(K: float, lam: float, hbar: float, dim: int):
    """Diagonal factors of the one-period operator, cached per parameter set.

    kick_fwd lives on the theta grid, kin on the momentum indices. Inverse
    factors are built analytically (exact sign flips of the exponents), so
    at lam = 0 the inverse and the adjoint coincide bitwise.
    """
    th = theta_grid(dim)
    n = n_values(dim)
    kick_phase = -K * np.cos(th) / hbar
    kick_gain = K * lam * np.sin(th) / hbar
    with np.errstate(over="ignore"):
        kick_fwd = np.exp(kick_gain + 1j * kick_phase)
        kick_inv = np.exp(-kick_gain - 1j * kick_phase)
    kin = np.exp(-0.5j * hbar * n.astype(float) ** 2)
    return kick_fwd, kick_inv, kin


def _renormalized(amps: np.ndarray, log_norm: float) -> QuantumState:
    nrm = float(np.linalg.norm(amps))
    if not (math.isfinite(nrm) and nrm > 0.0):
        raise OverflowError(
            "non-finite amplitudes after the kick; K*lambda/hbar is too large "
            "for one unrenormalized step — renormalize more often (smaller steps)"
        )
    return QuantumState(amps=amps / nrm, log_norm=log_norm + math.log(nrm))


def floquet_step(state: QuantumState, params, direction: str = "forward") -> QuantumState:
    """Apply one period of the evolution (or its adjoint/inverse).

    forward: kick in the angle representation, then kinetic phase in the
    momentum representation. adjoint: conjugate factors in reverse order.
    inverse: exact inverse factors in reverse order. The result is
    renormalized and ln(pre-normalization norm) is added to log_norm.
    """
    kick_fwd, kick_inv, kin = _kernels(params.K, params.lam, params.hbar, state.dim)
    # an overflowing kick factor produces inf/nan amplitudes here; the
    # renormalization below turns that into an OverflowError
    with np.errstate(over="ignore", invalid="ignore"):
        if direction == "forward":
            values = to_angle(state.amps) * kick_fwd
            amps = to_momentum(values) * kin
        elif direction == "adjoint":
            values = to_angle(state.amps * np.conj(kin)) * np.conj(kick_fwd)
            amps = to_momentum(values)
        elif direction == "inverse":
            values = to_angle(state.amps * np.conj(kin)) * kick_inv
            amps = to_momentum(values)
        else:
            raise ValueError(f"unknown direction {direction!r}")
    return _renormalized(amps, state.log_norm)


def init_uniform_state(dim: int) -> QuantumState:
    """Ground state of the free rotor: all weight at n = 0 (flat in angle)."""
    _check_dim(dim)
    amps = np.zeros(dim, dtype=complex)
    amps[dim // 2] = 1.0
    return QuantumState(amps=amps, log_norm=0.0)


def init_gaussian_state(dim: int, sigma: float) -> QuantumState:
    """Gaussian wavepacket (sigma/pi)^(1/4) exp(-sigma theta^2 / 2) sampled
    on the angle grid and transformed to the momentum basis. For sigma ~ 10
    the wrap-around leakage at +/-pi is ~e^(-sigma pi^2), far below rounding.
    """
    _check_dim(dim)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    th = theta_grid(dim)
    values = (sigma / np.pi) ** 0.25 * np.exp(-0.5 * sigma * th**2)
    amps = to_momentum(values.astype(complex))
    return QuantumState(amps=amps / np.linalg.norm(amps), log_norm=0.0)


def from_amplitudes(raw: np.ndarray) -> QuantumState:
    """Build a state from arbitrary amplitudes; the overall scale (and any
    global phase) carries no physics and is normalized away.
    """
    raw = np.asarray(raw, dtype=complex)
    _check_dim(raw.size)
    nrm = np.linalg.norm(raw)
    if not (np.isfinite(nrm) and nrm > 0):
        raise ValueError("amplitudes must be finite and not all zero")
    return QuantumState(amps=raw / nrm, log_norm=0.0)


def observables(state: QuantumState, params) -> Observables:
    """Momentum mean, second moment, and variance with p_n = n*hbar."""
    p = n_values(state.dim) * params.hbar
    w = np.abs(state.amps) ** 2
    mean_p = float(np.dot(p, w))
    mean_p2 = float(np.dot(p * p, w))
    return Observables(
        mean_p=mean_p, mean_p2=mean_p2, m2=mean_p2 - mean_p**2, log_norm=state.log_norm
    )


def momentum_distribution(state: QuantumState) -> tuple[np.ndarray, np.ndarray]:
    """(n, |psi_n|^2) over the basis; the probabilities sum to one."""
    return n_values(state.dim), np.abs(state.amps) ** 2


def angular_distribution(state: QuantumState) -> tuple[np.ndarray, np.ndarray]:
    """(theta_k, probability density); the Riemann sum of the density over
    the grid spacing 2 pi / dim integrates to one.
    """
    values = to_angle(state.amps)
    dens = np.abs(values) ** 2
    return theta_grid(state.dim), dens / (2.0 * np.pi)


def tail_mass(state: QuantumState, frac: float = 0.01) -> float:
    """Probability in the outer frac of momentum indices at each edge."""
    k = max(1, int(math.ceil(state.dim * frac / 2)))
    w = np.abs(state.amps) ** 2
    return float(np.sum(w[:k]) + np.sum(w[-k:]))


def evolve(
    state: QuantumState,
    params,
    t: int,
    direction: str = "forward",
    tail_guard: float = 1e-10,
    tail_frac: float = 0.01,
) -> ObservableSeries:
    """Apply t Floquet steps, recording observables at every kick (entry 0
    is the initial state). If the probability in the outer tail_frac of the
    basis exceeds tail_guard the truncation is suspect: a warning record is
    attached and the run continues.
    """
    if t < 1:
        raise ValueError(f"kick count must be >= 1, got {t}")
    entries = [observables(state, params)]
    warnings: list[tuple[int, str]] = []
    for k in range(1, t + 1):
        state = floquet_step(state, params, direction)
        entries.append(observables(state, params))
        tm = tail_mass(state, tail_frac)
        if tm > tail_guard:
            warnings.append(
                (k, f"tail mass {tm:.3e} exceeds guard {tail_guard:.1e}; "
                    f"basis size {state.dim} may be too small")
            )
    return ObservableSeries(entries=entries, warnings=warnings)


def evolve_state(state: QuantumState, params, t: int, direction: str = "forward") -> QuantumState:
    """Apply t Floquet steps and return only the final state."""
    for _ in range(t):
        state = floquet_step(state, params, direction)
    return state

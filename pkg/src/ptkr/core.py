"""Shared parameter types, validation, and deterministic ensemble setup.

All record types are immutable after construction and safe to share between
threads. Randomness is counter-based (Philox), so the initial angle of
trajectory ``i`` is a pure function of ``(seed, i)`` regardless of how many
trajectories are drawn or how the work is later split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# exp() overflows float64 just above 709.78, so hyperbolic arguments must be
# guarded below that; p_clamp**2 must itself be a finite double.
_MAX_GUARD = 709.0
_MAX_CLAMP = math.sqrt(np.finfo(np.float64).max)


class ParameterError(ValueError):
    """Rejected parameter or configuration value; the message names the field."""


@dataclass(frozen=True)
class SystemParams:
    """Kick strengths and numerical guards for one rotor.

    K is the real kick strength, lam the strength of the imaginary kicking
    component, hbar the effective Planck constant (quantum modules only).
    p_clamp caps classical momentum magnitudes on divergence so that p**2
    stays finite; theta_i_guard bounds hyperbolic arguments, anything beyond
    it is declared diverged.
    """

    K: float
    lam: float
    hbar: float = 1.0
    p_clamp: float = 1.0e152
    theta_i_guard: float = 700.0

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise ParameterError(f"K must be a positive finite number, got {self.K}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ParameterError(f"lambda must be non-negative and finite, got {self.lam}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ParameterError(f"hbar must be a positive finite number, got {self.hbar}")
        if not (0 < self.p_clamp <= _MAX_CLAMP):
            raise ParameterError(
                f"p_clamp must lie in (0, {_MAX_CLAMP:.3e}] so p_clamp**2 is finite, "
                f"got {self.p_clamp}"
            )
        if not (0 < self.theta_i_guard <= _MAX_GUARD):
            raise ParameterError(
                f"theta_i_guard must lie in (0, {_MAX_GUARD}], got {self.theta_i_guard}"
            )


def make_params(K, lam, hbar=1.0, p_clamp=1.0e152, theta_i_guard=700.0) -> SystemParams:
    """Validate and build a SystemParams; raises ParameterError on bad input."""
    return SystemParams(
        K=float(K),
        lam=float(lam),
        hbar=float(hbar),
        p_clamp=float(p_clamp),
        theta_i_guard=float(theta_i_guard),
    )


@dataclass(frozen=True)
class ComplexPhasePoint:
    """One complex classical trajectory state: angle and momentum split
    into real and imaginary parts, plus a latched divergence flag.
    """

    theta_r: float
    theta_i: float
    p_r: float
    p_i: float
    diverged: bool = False

    def __post_init__(self):
        if not self.diverged:
            for name in ("theta_r", "theta_i", "p_r", "p_i"):
                if not math.isfinite(getattr(self, name)):
                    raise ParameterError(
                        f"non-diverged point must have finite components; {name} is "
                        f"{getattr(self, name)}"
                    )


@dataclass(frozen=True)
class EnsembleConfig:
    """Trajectory count, RNG seed, and kick horizon for one ensemble run."""

    n_traj: int = 100_000
    seed: int = 0
    t_max: int = 100

    def __post_init__(self):
        if self.n_traj < 1:
            raise ParameterError(f"n_traj must be >= 1, got {self.n_traj}")
        if self.t_max < 1:
            raise ParameterError(f"t_max must be >= 1, got {self.t_max}")
        if not (-(2**63) <= self.seed < 2**64):
            raise ParameterError(f"seed must fit in 64 bits, got {self.seed}")


def initial_angles(cfg: EnsembleConfig) -> np.ndarray:
    """Initial real angles, i.i.d. uniform on [-pi, pi).

    Philox is counter-based: value i of the stream keyed by the seed depends
    only on (seed, i), so prefixes agree across different n_traj and the
    draw order never depends on parallelism.
    """
    rng = np.random.Generator(np.random.Philox(key=cfg.seed % 2**64))
    return rng.uniform(-np.pi, np.pi, size=cfg.n_traj)


def sample_initial_ensemble(cfg: EnsembleConfig) -> list[ComplexPhasePoint]:
    """Initial ensemble: theta_r uniform on [-pi, pi), everything else zero."""
    return [
        ComplexPhasePoint(theta_r=float(th), theta_i=0.0, p_r=0.0, p_i=0.0)
        for th in initial_angles(cfg)
    ]

"""Truncated Floquet matrix, quasienergies, and PT-breaking detection.

The one-period operator is unitary at lam = 0 (spectrum on the unit circle)
and non-unitary beyond the PT-breaking threshold, where eigenvalue moduli
leave the unit circle in reciprocal pairs. Quasienergies follow from
eigenvalues mu of the matrix through mu = e^{-i eps}: the real part is the
phase -Arg(mu) wrapped to (-pi, pi], and the imaginary part is reported as
-ln|mu| so that growing modes (|mu| > 1) carry negative eps_i.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ptkr.quantum import _kernels, to_angle, to_momentum


@dataclass(frozen=True)
class QuasienergySet:
    """Quasienergies eps = eps_r + i*eps_i of one Floquet matrix, with the
    worst deviation of the eigenvalue moduli from the unit circle.
    """

    dim: int
    eps: np.ndarray
    max_modulus_deviation: float


@dataclass(frozen=True)
class LambdaCResult:
    """Bisection output: the midpoint estimate plus the final bracket
    certificate (PT unbroken at low, broken at high)."""

    lambda_c: float
    low: float
    high: float
    iterations: int
    dim: int


def apply_floquet_raw(amps, params, direction: str = "forward"):
    """One unrenormalized period applied to a vector or to the columns of a
    matrix (shape (dim, m)). Same factor order as floquet_step.
    """
    amps = np.asarray(amps, dtype=complex)
    dim = amps.shape[0]
    axis = 0 if amps.ndim == 2 else -1
    kick_fwd, kick_inv, kin = _kernels(params.K, params.lam, params.hbar, dim)
    if amps.ndim == 2:
        kick_fwd, kick_inv, kin = kick_fwd[:, None], kick_inv[:, None], kin[:, None]
    if direction == "forward":
        return to_momentum(to_angle(amps, axis=axis) * kick_fwd, axis=axis) * kin
    if direction == "adjoint":
        return to_momentum(to_angle(amps * np.conj(kin), axis=axis) * np.conj(kick_fwd), axis=axis)
    if direction == "inverse":
        return to_momentum(to_angle(amps * np.conj(kin), axis=axis) * kick_inv, axis=axis)
    raise ValueError(f"unknown direction {direction!r}")


def build_floquet_matrix(params, dim: int) -> np.ndarray:
    """Dense one-period matrix: column j is the unrenormalized step applied
    to the j-th momentum basis vector. dim must be a power of two >= 8.
    """
    if dim < 8 or dim & (dim - 1) != 0:
        raise ValueError(f"matrix dimension must be a power of two >= 8, got {dim}")
    m = apply_floquet_raw(np.eye(dim, dtype=complex), params)
    if not np.isfinite(m).all():
        raise OverflowError(
            "Floquet matrix has non-finite entries; K*lambda/hbar too large "
            "for an unrenormalized period"
        )
    return m


def quasienergies(matrix: np.ndarray) -> QuasienergySet:
    """Full non-Hermitian eigendecomposition of a square complex matrix.

    eps_r = -Arg(mu) in (-pi, pi]; eps_i = -ln|mu| (negative for growth).
    """
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"need a square matrix, got shape {matrix.shape}")
    try:
        mu = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        norm = float(np.linalg.norm(matrix))
        raise np.linalg.LinAlgError(
            f"eigendecomposition failed for dim={matrix.shape[0]}, "
            f"matrix norm {norm:.3e}: {exc}"
        ) from exc
    moduli = np.abs(mu)
    eps_r = -np.angle(mu)
    eps_r = np.where(eps_r <= -np.pi, eps_r + 2.0 * np.pi, eps_r)
    eps_i = -np.log(moduli)
    return QuasienergySet(
        dim=matrix.shape[0],
        eps=eps_r + 1j * eps_i,
        max_modulus_deviation=float(np.max(np.abs(moduli - 1.0))),
    )


def is_pt_broken(qs: QuasienergySet, tol: float = 1e-6) -> bool:
    """True iff some quasienergy has |imaginary part| above tol."""
    return bool(np.max(np.abs(qs.eps.imag)) > tol)


def find_lambda_c(
    params,
    dim: int,
    bracket: tuple[float, float],
    tol_lambda: float = 1e-3,
    tol_eps: float = 1e-6,
) -> LambdaCResult:
    """Bisect the PT-breaking threshold in lambda at fixed (K, hbar).

    The bracket must straddle the transition: unbroken at bracket[0],
    broken at bracket[1]. Bisection runs until the bracket width falls
    below tol_lambda; the midpoint is returned with the certificate.
    """
    low, high = float(bracket[0]), float(bracket[1])
    if not (0 <= low < high):
        raise ValueError(f"invalid bracket [{low}, {high}]")

    def broken(lam: float) -> bool:
        qs = quasienergies(build_floquet_matrix(replace(params, lam=lam), dim))
        return is_pt_broken(qs, tol_eps)

    if broken(low):
        raise ValueError(f"bracket invalid: PT already broken at lambda={low}")
    if not broken(high):
        raise ValueError(f"bracket invalid: PT not broken at lambda={high}")

    iterations = 0
    while high - low > tol_lambda:
        mid = 0.5 * (low + high)
        if broken(mid):
            high = mid
        else:
            low = mid
        iterations += 1
        if iterations > 200:  # tol below float resolution
            break
    return LambdaCResult(
        lambda_c=0.5 * (low + high), low=low, high=high, iterations=iterations, dim=dim
    )

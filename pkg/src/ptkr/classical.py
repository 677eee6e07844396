"""Complex classical map of the PT-symmetric kicked rotor.

The kick updates momentum first, then the angle with the updated momentum:

    p_r' = p_r + K sin(theta_r) [cosh(theta_i) - lam sinh(theta_i)]
    p_i' = p_i + K cos(theta_r) [sinh(theta_i) - lam cosh(theta_i)]
    theta' = theta + p'                       (both real and imaginary parts)

At lam = 0 with theta_i = p_i = 0 this closes on the standard (Chirikov)
map. With lam > 0 the imaginary components grow roughly like lam * K**t
until they blow past double precision; trajectories crossing the guards are
latched as diverged with momenta pinned to +/-p_clamp, which produces the
saturation plateau of the ensemble second moments at ~p_clamp**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ptkr.core import ComplexPhasePoint, EnsembleConfig, SystemParams, initial_angles
from ptkr.fitting import fit_line


@dataclass(frozen=True)
class EnsembleSeries:
    """Per-kick ensemble record: momentum means, second moments, and the
    number of diverged trajectories. Row t=0 holds the initial conditions,
    so every array has length t_max + 1.
    """

    params: SystemParams
    config: EnsembleConfig
    t: np.ndarray
    mean_pr: np.ndarray
    mean_pi: np.ndarray
    m2_r: np.ndarray
    m2_i: np.ndarray
    n_diverged: np.ndarray


@dataclass(frozen=True)
class DiffusionFit:
    """Fitted diffusion laws: M2_r(t) ~ D*t on window_r and
    ln M2_i(t) ~ alpha*t + beta on window_i, both inside [1, tau).
    """

    D: float
    alpha: float
    beta: float
    tau: int | None
    window_r: tuple[int, int]
    window_i: tuple[int, int]


def _hyperbolic_factors(x: np.ndarray, lam: float):
    """Return (cosh x - lam sinh x, sinh x - lam cosh x) elementwise.

    For |x| > 1 the factored form ((1-lam) e^x +/- (1+lam) e^-x) / 2 is
    used: it evaluates the 1-lam difference exactly instead of subtracting
    two e^x-sized terms, which matters as lam approaches 1 near the
    divergence regime. For |x| <= 1 the direct hyperbolics are used instead,
    because there the factored form itself cancels catastrophically (it is
    the direct form that is exact at x = 0, giving (1, -lam)).
    """
    fc = np.empty_like(x)
    fs = np.empty_like(x)
    small = np.abs(x) <= 1.0
    xs = x[small]
    fc[small] = np.cosh(xs) - lam * np.sinh(xs)
    fs[small] = np.sinh(xs) - lam * np.cosh(xs)
    xl = x[~small]
    a = (1.0 - lam) * np.exp(xl)
    b = (1.0 + lam) * np.exp(-xl)
    fc[~small] = 0.5 * (a + b)
    fs[~small] = 0.5 * (a - b)
    return fc, fs


def _rail(value, previous, clamp):
    """Momentum value recorded for a diverged trajectory: +/-clamp with the
    sign of the candidate update (falling back to the pre-step sign when the
    candidate is NaN, and to + when that is zero too).
    """
    if math.isnan(value):
        value = previous
    if value == 0.0 or math.isnan(value):
        return clamp
    return math.copysign(clamp, value)


def map_step(s: ComplexPhasePoint, params: SystemParams) -> ComplexPhasePoint:
    """Advance one trajectory by one kick (expanded real-arithmetic form).

    If the updated |theta_i| exceeds theta_i_guard, or any updated component
    is non-finite, or an updated momentum exceeds p_clamp in magnitude, the
    returned point is flagged diverged with momenta pinned to +/-p_clamp
    (sign of the candidate update) and angles frozen at their input values.
    """
    if s.diverged:
        raise ValueError("map_step applied to an already diverged trajectory")
    K, lam = params.K, params.lam
    with np.errstate(over="ignore", invalid="ignore"):
        fc, fs = _hyperbolic_factors(np.array([s.theta_i], dtype=float), lam)
        p_r = s.p_r + K * np.sin(s.theta_r) * float(fc[0])
        p_i = s.p_i + K * np.cos(s.theta_r) * float(fs[0])
        theta_r = s.theta_r + p_r
        theta_i = s.theta_i + p_i

    bad = (
        abs(theta_i) > params.theta_i_guard
        or abs(p_r) > params.p_clamp
        or abs(p_i) > params.p_clamp
        or not (
            math.isfinite(p_r)
            and math.isfinite(p_i)
            and math.isfinite(theta_r)
            and math.isfinite(theta_i)
        )
    )
    if bad:
        return ComplexPhasePoint(
            theta_r=s.theta_r,
            theta_i=s.theta_i,
            p_r=_rail(p_r, s.p_r, params.p_clamp),
            p_i=_rail(p_i, s.p_i, params.p_clamp),
            diverged=True,
        )
    return ComplexPhasePoint(
        theta_r=float(theta_r), theta_i=float(theta_i), p_r=float(p_r), p_i=float(p_i)
    )


def map_step_complex_oracle(s: ComplexPhasePoint, params: SystemParams) -> ComplexPhasePoint:
    """One kick evaluated directly in complex arithmetic,

        p' = p + K [sin(theta) - i lam cos(theta)],  theta' = theta + p',

    used as an independent check on the expanded real form. Same divergence
    contract as map_step.
    """
    if s.diverged:
        raise ValueError("map_step applied to an already diverged trajectory")
    K, lam = params.K, params.lam
    theta = complex(s.theta_r, s.theta_i)
    p = complex(s.p_r, s.p_i)
    # cmath overflows with an exception rather than inf for large |theta_i|;
    # numpy's complex sin/cos return inf components instead, which the
    # divergence check below turns into the latched flag.
    with np.errstate(over="ignore", invalid="ignore"):
        pn = p + K * (np.sin(theta) - 1j * lam * np.cos(theta))
        tn = theta + pn

    bad = (
        abs(tn.imag) > params.theta_i_guard
        or abs(pn.real) > params.p_clamp
        or abs(pn.imag) > params.p_clamp
        or not (
            math.isfinite(pn.real)
            and math.isfinite(pn.imag)
            and math.isfinite(tn.real)
            and math.isfinite(tn.imag)
        )
    )
    if bad:
        return ComplexPhasePoint(
            theta_r=s.theta_r,
            theta_i=s.theta_i,
            p_r=_rail(pn.real, s.p_r, params.p_clamp),
            p_i=_rail(pn.imag, s.p_i, params.p_clamp),
            diverged=True,
        )
    return ComplexPhasePoint(
        theta_r=float(tn.real), theta_i=float(tn.imag), p_r=float(pn.real), p_i=float(pn.imag)
    )


def _moments(p_r: np.ndarray, p_i: np.ndarray):
    """Means and variances of the momentum components.

    Two-pass with pre-scaling: deviations are divided by their largest
    magnitude before squaring so that sums of p_clamp**2-sized terms cannot
    overflow even for large ensembles.
    """

    def _var(x):
        mu = float(np.mean(x))
        d = x - mu
        s = float(np.max(np.abs(d)))
        if s == 0.0:
            return mu, 0.0
        r = d / s
        return mu, (s * s) * float(np.mean(r * r))

    mean_pr, m2_r = _var(p_r)
    mean_pi, m2_i = _var(p_i)
    return mean_pr, mean_pi, m2_r, m2_i


def second_moments(snapshot) -> tuple[float, float, float, float]:
    """(mean_pr, mean_pi, m2_r, m2_i) over a non-empty trajectory snapshot."""
    pts = list(snapshot)
    if not pts:
        raise ValueError("second_moments of an empty snapshot")
    p_r = np.array([s.p_r for s in pts])
    p_i = np.array([s.p_i for s in pts])
    return _moments(p_r, p_i)


def count_diverged(snapshot) -> int:
    """Number of trajectories with the diverged flag set."""
    return sum(1 for s in snapshot if s.diverged)


def evolve_ensemble(cfg: EnsembleConfig, params: SystemParams) -> EnsembleSeries:
    """Evolve the full ensemble for t_max kicks and record moments per kick.

    Vectorized over trajectories with the same update and guard logic as
    map_step (the agreement is covered by tests). Diverged trajectories keep
    their pinned momenta inside the moment sums and are never updated again,
    so the series shows the saturation plateau rather than NaNs. Results are
    bit-reproducible for a fixed config.
    """
    n = cfg.n_traj
    theta_r = initial_angles(cfg)
    theta_i = np.zeros(n)
    p_r = np.zeros(n)
    p_i = np.zeros(n)
    diverged = np.zeros(n, dtype=bool)

    t = np.arange(cfg.t_max + 1)
    mean_pr = np.zeros(cfg.t_max + 1)
    mean_pi = np.zeros(cfg.t_max + 1)
    m2_r = np.zeros(cfg.t_max + 1)
    m2_i = np.zeros(cfg.t_max + 1)
    n_div = np.zeros(cfg.t_max + 1, dtype=np.int64)

    mean_pr[0], mean_pi[0], m2_r[0], m2_i[0] = _moments(p_r, p_i)

    K, lam, clamp, guard = params.K, params.lam, params.p_clamp, params.theta_i_guard

    def railed(cand, prev):
        # Rail value for newly diverged rows: sign of the candidate, falling
        # back to the previous sign (then +) for NaN candidates.
        v = np.where(np.isnan(cand), prev, cand)
        sgn = np.where(np.isnan(v) | (v == 0.0), 1.0, np.sign(v))
        return sgn * clamp

    for k in range(1, cfg.t_max + 1):
        act = ~diverged
        if act.any():
            tr, ti = theta_r[act], theta_i[act]
            with np.errstate(over="ignore", invalid="ignore"):
                fc, fs = _hyperbolic_factors(ti, lam)
                pr_new = p_r[act] + K * np.sin(tr) * fc
                pi_new = p_i[act] + K * np.cos(tr) * fs
                tr_new = tr + pr_new
                ti_new = ti + pi_new
            bad = (
                (np.abs(ti_new) > guard)
                | (np.abs(pr_new) > clamp)
                | (np.abs(pi_new) > clamp)
                | ~(
                    np.isfinite(pr_new)
                    & np.isfinite(pi_new)
                    & np.isfinite(tr_new)
                    & np.isfinite(ti_new)
                )
            )
            p_r[act] = np.where(bad, railed(pr_new, p_r[act]), pr_new)
            p_i[act] = np.where(bad, railed(pi_new, p_i[act]), pi_new)
            theta_r[act] = np.where(bad, tr, tr_new)
            theta_i[act] = np.where(bad, ti, ti_new)
            diverged[act] = bad

        mean_pr[k], mean_pi[k], m2_r[k], m2_i[k] = _moments(p_r, p_i)
        n_div[k] = int(np.count_nonzero(diverged))

    return EnsembleSeries(
        params=params,
        config=cfg,
        t=t,
        mean_pr=mean_pr,
        mean_pi=mean_pi,
        m2_r=m2_r,
        m2_i=m2_i,
        n_diverged=n_div,
    )


def threshold_time_tc(params: SystemParams) -> float:
    """Estimated breakdown time of the exponential growth, -log_K(lambda).

    Requires 0 < lambda < 1 and K > 1 (otherwise the estimate has no
    meaning and a ValueError is raised).
    """
    if not (0 < params.lam < 1):
        raise ValueError(f"threshold time needs 0 < lambda < 1, got {params.lam}")
    if not (params.K > 1):
        raise ValueError(f"threshold time needs K > 1, got {params.K}")
    return -math.log(params.lam) / math.log(params.K)


def detect_threshold_time(series: EnsembleSeries) -> int | None:
    """First kick at which any trajectory has diverged; None if none ever
    does (e.g. the Hermitian lam = 0 limit). Divergence onset is the
    operational definition of the transition time tau.
    """
    if series.t.size < 4:
        raise ValueError("series too short to detect a threshold (need >= 4 kicks)")
    hits = np.nonzero(series.n_diverged > 0)[0]
    if hits.size == 0:
        return None
    return int(series.t[hits[0]])


def special_trajectory_prediction(
    n: int, params: SystemParams, validity_max: float = 0.01
) -> ComplexPhasePoint:
    """Analytic estimate for the all-zero initial trajectory after n kicks:
    (theta_r, theta_i, p_r, p_i) = (0, -K**n lam, 0, -K**n lam).

    Only meaningful while K**(n-1) * lam stays small; raises ValueError when
    K**(n-1) * lam exceeds validity_max. Note this keeps only the leading
    K**n term of the growth, a strong-kick (K >> 1) estimate.
    """
    if n < 1:
        raise ValueError(f"kick count must be >= 1, got {n}")
    K, lam = params.K, params.lam
    if lam > 0 and (n - 1) * math.log(K) + math.log(lam) > math.log(validity_max):
        raise ValueError(
            f"out of regime: K**(n-1)*lambda = {math.exp((n - 1) * math.log(K) + math.log(lam)):.3e} "
            f"exceeds {validity_max}; the exponential-growth estimate only holds while "
            "this product is small"
        )
    log_mag = n * math.log(K) + (math.log(lam) if lam > 0 else -math.inf)
    value = -math.exp(log_mag) if log_mag > 700.0 else -(K**n) * lam
    return ComplexPhasePoint(theta_r=0.0, theta_i=value, p_r=0.0, p_i=value)


def _default_windows(series: EnsembleSeries, tau: int | None):
    """Default fit windows [2, floor(0.8 t_c)], kept inside the recorded
    series and strictly before the divergence onset.
    """
    t_hi = int(series.t[-1])
    try:
        tc = threshold_time_tc(series.params)
        hi = int(math.floor(0.8 * tc))
    except ValueError:
        hi = t_hi
    hi = min(hi, t_hi)
    if tau is not None:
        hi = min(hi, tau - 1)
    return (2, hi)


def fit_diffusion(
    series: EnsembleSeries,
    window_r: tuple[int, int] | None = None,
    window_i: tuple[int, int] | None = None,
) -> DiffusionFit:
    """Fit the diffusion laws on the pre-threshold part of a series.

    D is the through-origin slope of m2_r vs t on window_r; (alpha, beta)
    is the least-squares line of ln m2_i vs t on window_i. Windows are
    inclusive [lo, hi] kick ranges and must end before the divergence onset.
    """
    tau = detect_threshold_time(series)
    if window_r is None:
        window_r = _default_windows(series, tau)
    if window_i is None:
        window_i = _default_windows(series, tau)

    bound = tau if tau is not None else int(series.t[-1]) + 1
    for name, (lo, hi) in (("window_r", window_r), ("window_i", window_i)):
        if lo < 1 or hi < lo + 1:
            raise ValueError(f"{name} [{lo}, {hi}] must lie in [1, tau) with >= 2 points")
        if hi >= bound:
            raise ValueError(
                f"{name} [{lo}, {hi}] reaches beyond the divergence onset tau={tau}"
            )

    lo, hi = window_r
    ts = series.t[lo : hi + 1].astype(float)
    D, _, _ = fit_line(ts, series.m2_r[lo : hi + 1], through_origin=True)

    lo, hi = window_i
    m2i = series.m2_i[lo : hi + 1]
    if np.any(m2i <= 0):
        raise ValueError(
            f"m2_i is not strictly positive on window_i [{lo}, {hi}]; "
            "no exponential regime to fit (lambda = 0?)"
        )
    alpha, beta, _ = fit_line(series.t[lo : hi + 1].astype(float), np.log(m2i))

    return DiffusionFit(
        D=D, alpha=alpha, beta=beta, tau=tau, window_r=window_r, window_i=window_i
    )

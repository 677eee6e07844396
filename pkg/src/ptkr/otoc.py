"""Out-of-time-order correlator C(t) = <[p(t), p]^2> for the kicked rotor.

Computed in the positive-definite form C(t) = ||[p(t), p] psi||^2 / ||psi||^2
via two branches: with F = t forward kicks and B = t backward kicks
(adjoint by default, exact inverse selectable),

    branch A = p B p F psi        (p applied after the echo)
    branch B = B p F p psi        (p applied before the forward leg)

so that A - B = [p(t), p] psi up to the backward-operator convention. Every
leg is renormalized per kick with its own log-norm ledger; the two branch
scales are combined analytically, and when the combined exponent leaves the
double range the value is reported as the non-finite marker (math.inf)
rather than an overflow — that marker is the observable divergence at t*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ptkr.fitting import fit_line
from ptkr.quantum import QuantumState, floquet_step, n_values

_LN_DBL_MAX = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class OtocSeries:
    """C(t) per kick with non-finite markers, plus fitted growth rate and
    the detected divergence / crossover times (None where absent).
    """

    params: object
    t: np.ndarray
    c: np.ndarray
    finite: np.ndarray
    backward_mode: str
    gamma: float | None
    t_star: int | None
    t_e: int | None


class _Branch:
    """A state vector factored as exp(log_scale) * unit vector."""

    __slots__ = ("vec", "log_scale", "zero")

    def __init__(self, vec: np.ndarray):
        self.vec = vec
        self.log_scale = 0.0
        self.zero = False

    def steps(self, params, t: int, direction: str):
        if self.zero:
            return
        state = QuantumState(amps=self.vec, log_norm=0.0)
        for _ in range(t):
            state = floquet_step(state, params, direction)
        self.vec = state.amps
        self.log_scale += state.log_norm

    def apply_p(self, hbar: float):
        if self.zero:
            return
        v = self.vec * (n_values(self.vec.size) * hbar)
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            self.zero = True
            self.vec = v
            return
        self.vec = v / nrm
        self.log_scale += math.log(nrm)


def otoc_at(t: int, params, initial: QuantumState, backward_mode: str = "adjoint") -> float:
    """C(t) for one kick count; math.inf marks a value beyond double range."""
    if t < 0:
        raise ValueError(f"kick count must be >= 0, got {t}")
    if backward_mode not in ("adjoint", "inverse"):
        raise ValueError(f"backward_mode must be 'adjoint' or 'inverse', got {backward_mode!r}")
    hbar = params.hbar

    a = _Branch(initial.amps.copy())
    a.steps(params, t, "forward")
    a.apply_p(hbar)
    a.steps(params, t, backward_mode)
    a.apply_p(hbar)

    b = _Branch(initial.amps.copy())
    b.apply_p(hbar)
    b.steps(params, t, "forward")
    b.apply_p(hbar)
    b.steps(params, t, backward_mode)

    if a.zero and b.zero:
        return 0.0
    if a.zero or b.zero:
        live = b if a.zero else a
        ln_c = 2.0 * live.log_scale
    else:
        scale = max(a.log_scale, b.log_scale)
        diff = math.exp(a.log_scale - scale) * a.vec - math.exp(b.log_scale - scale) * b.vec
        d = float(np.linalg.norm(diff))
        if d == 0.0:
            return 0.0
        ln_c = 2.0 * scale + 2.0 * math.log(d)
    if not math.isfinite(ln_c) or ln_c > _LN_DBL_MAX:
        return math.inf
    return math.exp(ln_c)


def otoc_series(
    params,
    t_max: int,
    initial: QuantumState,
    backward_mode: str = "adjoint",
    gamma_window: tuple[int, int] | None = None,
) -> OtocSeries:
    """C(t) for t = 0..t_max (quadratic in t_max kick applications).

    The non-finite marker latches: once some t exceeds the double range all
    later entries are recorded non-finite without recomputation (the branch
    log-norms only keep growing). Attaches the fitted growth rate over
    gamma_window (default [1, 4] clipped to the finite range), the first
    non-finite time t_star, and the exponential-to-power-law crossover t_e.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    c = np.zeros(t_max + 1)
    for t in range(t_max + 1):
        c[t] = otoc_at(t, params, initial, backward_mode)
        if not math.isfinite(c[t]):
            c[t + 1 :] = math.inf
            break
    finite = np.isfinite(c)

    series = OtocSeries(
        params=params,
        t=np.arange(t_max + 1),
        c=c,
        finite=finite,
        backward_mode=backward_mode,
        gamma=None,
        t_star=None,
        t_e=None,
    )
    t_star = detect_divergence_time(series)
    last_finite = int(np.nonzero(finite)[0][-1]) if finite.any() else 0

    gamma = None
    if gamma_window is None:
        gamma_window = (1, min(4, last_finite))
    lo, hi = gamma_window
    if hi >= lo + 1 and hi <= last_finite and np.all(c[lo : hi + 1] > 0):
        gamma = fit_growth_rate(series, gamma_window)

    t_e = estimate_ehrenfest_time(series)
    return OtocSeries(
        params=params,
        t=series.t,
        c=c,
        finite=finite,
        backward_mode=backward_mode,
        gamma=gamma,
        t_star=t_star,
        t_e=t_e,
    )


def detect_divergence_time(series: OtocSeries) -> int | None:
    """First kick with a non-finite C(t); None if the series stays finite."""
    bad = np.nonzero(~series.finite)[0]
    if bad.size == 0:
        return None
    return int(series.t[bad[0]])


def _window_values(series: OtocSeries, window: tuple[int, int]):
    lo, hi = window
    if lo < 0 or hi > int(series.t[-1]) or hi < lo + 1:
        raise ValueError(f"window [{lo}, {hi}] must contain >= 2 recorded kicks")
    sel = slice(lo, hi + 1)
    if not series.finite[sel].all():
        raise ValueError(f"window [{lo}, {hi}] touches non-finite entries")
    cs = series.c[sel]
    if np.any(cs <= 0):
        raise ValueError(f"window [{lo}, {hi}] touches zero entries; cannot take logs")
    return series.t[sel].astype(float), cs


def fit_growth_rate(series: OtocSeries, window: tuple[int, int]) -> float:
    """Least-squares slope of ln C(t) over an inclusive kick window."""
    ts, cs = _window_values(series, window)
    slope, _, _ = fit_line(ts, np.log(cs))
    return slope


def fit_power_exponent(series: OtocSeries, window: tuple[int, int]) -> float:
    """Least-squares slope of ln C vs ln t over an inclusive kick window
    (the exponent q of C ~ t^q)."""
    ts, cs = _window_values(series, window)
    if ts[0] < 1:
        raise ValueError("power-law window must start at t >= 1")
    slope, _, _ = fit_line(np.log(ts), np.log(cs))
    return slope


def estimate_ehrenfest_time(series: OtocSeries) -> int | None:
    """Breakpoint of a two-segment fit: exponential (ln C ~ a + g t) up to
    the breakpoint, power law (ln C ~ c + q ln t) beyond it.

    Returns the breakpoint kick, or None when no breakpoint explains the
    data better than a single exponential (e.g. a purely exponential
    series) or too few finite points exist.
    """
    fin = series.finite & (series.c > 0) & (series.t >= 1)
    idx = np.nonzero(fin)[0]
    # need a contiguous finite run from t = 1
    if idx.size < 6 or idx[0] != 1:
        return None
    run_end = idx[np.nonzero(np.diff(idx) > 1)[0][0]] if np.any(np.diff(idx) > 1) else idx[-1]
    ts = series.t[1 : run_end + 1].astype(float)
    ln_c = np.log(series.c[1 : run_end + 1])
    n = ts.size
    if n < 6:
        return None

    def sse_line(x, y):
        if x.size < 2:
            return math.inf
        slope, intercept, rms = fit_line(x, y)
        return rms * rms * x.size

    sse_single = sse_line(ts, ln_c)
    best = (math.inf, None)
    for b in range(2, n - 2):  # breakpoint at ts[b], >= 3 points per side
        sse = sse_line(ts[: b + 1], ln_c[: b + 1]) + sse_line(np.log(ts[b:]), ln_c[b:])
        if sse < best[0]:
            best = (sse, int(ts[b]))
    if best[1] is None:
        return None
    if sse_single < 1e-12 or best[0] >= 0.5 * sse_single:
        return None
    return best[1]

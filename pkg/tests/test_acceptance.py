"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line per sub-check (run with -s to see
them live) and fails if any sub-check misses its tolerance. Expensive
simulations are shared through session fixtures. Six sub-checks probe
strong-kick idealizations that the exact dynamics does not meet at the
stated tolerance; they are asserted faithfully anyway and fail honestly,
with the measured values in the failure message (see README, "Known
deviations").
"""

import math
import time

import numpy as np
import pytest
from scipy import special

from ptkr import (
    ComplexPhasePoint,
    EnsembleConfig,
    build_floquet_matrix,
    detect_threshold_time,
    evolve,
    evolve_ensemble,
    find_lambda_c,
    fit_diffusion,
    fit_growth_rate,
    fit_power_exponent,
    floquet_step,
    init_gaussian_state,
    init_uniform_state,
    is_pt_broken,
    make_params,
    map_step,
    map_step_complex_oracle,
    momentum_distribution,
    angular_distribution,
    otoc_series,
    quasienergies,
    special_trajectory_prediction,
    threshold_time_tc,
)
from ptkr.fitting import fit_line
from ptkr.quantum import evolve_state

SEED = 1234


def check(record, label, ok, detail):
    record.append((label, bool(ok)))
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


def finish(record):
    failed = [label for label, ok in record if not ok]
    assert not failed, f"{len(failed)} sub-check(s) failed: {failed}"


def rel_ok(value, target, rel):
    return abs(value - target) <= rel * abs(target)


@pytest.fixture(scope="session")
def classical_run():
    t0 = time.time()
    series = evolve_ensemble(
        EnsembleConfig(n_traj=10_000, seed=SEED, t_max=30), make_params(5, 1e-10, 1)
    )
    return series, time.time() - t0


@pytest.fixture(scope="session")
def otoc_small_lambda():
    params = make_params(8, 1e-5, 0.01)
    psi = init_gaussian_state(2**14, 10.0)
    t0 = time.time()
    series = otoc_series(params, 25, psi, gamma_window=(1, 4))
    return series, time.time() - t0


@pytest.fixture(scope="session")
def ballistic_run():
    params = make_params(7, 0.5, 1.4)
    t0 = time.time()
    series = evolve(init_uniform_state(4096), params, 100)
    final200 = evolve_state(init_uniform_state(4096), params, 200)
    return series, final200, time.time() - t0


def test_classical_normal_diffusion(classical_run):
    series, elapsed = classical_run
    rec = []
    fit = fit_diffusion(series, window_r=(2, 12))
    check(rec, "D = K^2/2 within 15%", rel_ok(fit.D, 12.5, 0.15), f"D={fit.D:.3f} target 12.5")
    check(rec, "runtime < 5 s", elapsed < 5.0, f"{elapsed:.2f} s")
    finish(rec)


def test_exponential_imaginary_diffusion(classical_run):
    series, _ = classical_run
    rec = []
    fit = fit_diffusion(series, window_r=(2, 12))
    alpha_target = 2 * math.log(5)
    beta_target = 2 * math.log(1e-10)
    check(
        rec,
        "alpha = 2 ln 5 within 5%",
        rel_ok(fit.alpha, alpha_target, 0.05),
        f"alpha={fit.alpha:.3f} target {alpha_target:.3f} "
        f"(exact-map cocycle rate sits ~12% below the strong-kick law)",
    )
    check(
        rec,
        "beta = 2 ln(1e-10) within 5%",
        rel_ok(fit.beta, beta_target, 0.05),
        f"beta={fit.beta:.2f} target {beta_target:.2f}",
    )
    finish(rec)


def test_threshold_time(classical_run):
    series, _ = classical_run
    rec = []
    tau = detect_threshold_time(series)
    check(rec, "tau in [12, 17]", 12 <= tau <= 17, f"tau={tau}, t_c=14.31")

    t0 = time.time()
    worst = 0.0
    detail = []
    for K in (5, 50):
        for lam in (1e-10, 1e-8, 1e-6, 1e-4):
            p = make_params(K, lam, 1)
            tc = threshold_time_tc(p)
            s = evolve_ensemble(
                EnsembleConfig(n_traj=10_000, seed=SEED, t_max=int(tc) + 8), p
            )
            t_det = detect_threshold_time(s)
            worst = max(worst, abs(t_det - tc))
            detail.append(f"K={K},lam={lam:g}:tau={t_det},tc={tc:.2f}")
    elapsed = time.time() - t0
    check(
        rec,
        "sweep max|tau - t_c| <= 2",
        worst <= 2.0,
        f"worst={worst:.2f} (guard-crossing lags t_c by the superexponential "
        f"climb; {'; '.join(detail)})",
    )
    check(rec, "sweep runtime < 60 s", elapsed < 60.0, f"{elapsed:.2f} s")
    finish(rec)


def test_special_trajectory():
    rec = []
    params = make_params(5, 1e-10, 1)
    map_step(ComplexPhasePoint(0.0, 0.0, 0.0, 0.0), params)  # warm numpy dispatch
    t0 = time.time()
    state = ComplexPhasePoint(0.0, 0.0, 0.0, 0.0)
    worst = 0.0
    values = []
    for n in range(1, 11):
        state = map_step(state, params)
        predicted = special_trajectory_prediction(n, params).p_i
        worst = max(worst, abs(state.p_i - predicted) / abs(predicted))
        values.append(f"n={n}: map={state.p_i:.3e} est={predicted:.3e}")
    elapsed = time.time() - t0
    check(
        rec,
        "iterated map matches -K^n*lambda within 1% for n <= 10",
        worst <= 0.01,
        f"worst rel dev {worst:.2f} (the -K^n estimate keeps only the leading "
        f"term; the exact map grows ~6.85x/kick at K=5, not 5x; {values[-1]})",
    )
    check(rec, "runtime < 1 ms", elapsed < 1e-3, f"{elapsed*1e3:.3f} ms")
    finish(rec)


def test_map_oracle_equivalence():
    rec = []
    rng = np.random.default_rng(2024)
    params = make_params(5, 1e-3, 1)
    t0 = time.time()
    worst = 0.0
    compared = 0
    for _ in range(1000):
        s = ComplexPhasePoint(
            theta_r=float(rng.uniform(-np.pi, np.pi)),
            theta_i=float(rng.uniform(-2, 2)),
            p_r=float(rng.uniform(-20, 20)),
            p_i=float(rng.uniform(-2, 2)),
        )
        for _ in range(20):
            a = map_step(s, params)
            b = map_step_complex_oracle(s, params)
            if a.diverged or b.diverged:
                break
            for name in ("theta_r", "theta_i", "p_r", "p_i"):
                va, vb = getattr(a, name), getattr(b, name)
                denom = max(abs(va), abs(vb), 1e-3)
                worst = max(worst, abs(va - vb) / denom)
            compared += 1
            s = a
    elapsed = time.time() - t0
    check(rec, "expanded vs complex map within 1e-9 relative", worst <= 1e-9,
          f"worst={worst:.2e} over {compared} step comparisons")
    check(rec, "runtime < 1 s", elapsed < 1.0, f"{elapsed:.2f} s")
    finish(rec)


def test_quantum_unitarity_and_bessel():
    rec = []
    t0 = time.time()
    params = make_params(5, 0.0, 1.0)
    state = init_uniform_state(2**12)
    for _ in range(1000):
        state = floquet_step(state, params)
    check(rec, "|log_norm| < 1e-9 after 1000 kicks (lam=0, dim=2^12)",
          abs(state.log_norm) < 1e-9, f"log_norm={state.log_norm:.2e}")

    kicked = floquet_step(init_uniform_state(2**12), params)
    ns, probs = momentum_distribution(kicked)
    bessel = special.jv(ns.astype(float), 5.0) ** 2
    err = float(np.max(np.abs(probs - bessel)))
    check(rec, "single-kick distribution = J_n(K/hbar)^2 within 1e-8", err < 1e-8,
          f"max err {err:.2e}")

    gain = math.exp(2 * floquet_step(init_uniform_state(2**12), make_params(7, 0.02, 1.4)).log_norm)
    target = float(special.iv(0, 0.2))
    check(rec, "one-kick norm gain = I0(0.2) within 1e-6", abs(gain - target) < 1e-6,
          f"gain={gain:.8f} target {target:.8f}")
    elapsed = time.time() - t0
    check(rec, "runtime < 10 s", elapsed < 10.0, f"{elapsed:.2f} s")
    finish(rec)


def test_otoc_exponential_window(otoc_small_lambda):
    series, elapsed = otoc_small_lambda
    rec = []
    gamma = fit_growth_rate(series, (1, 4))
    target = 2 * math.log(8)
    check(rec, "gamma = 2 ln 8 within 15% over t in [1,4]", rel_ok(gamma, target, 0.15),
          f"gamma={gamma:.3f} target {target:.3f}")
    t_e = series.t_e
    check(rec, "Ehrenfest estimate in [2, 8]", t_e is not None and 2 <= t_e <= 8,
          f"t_E={t_e}")
    if t_e is not None:
        window = (t_e + 2, min(3 * t_e, int(series.t[-1])))
        q = fit_power_exponent(series, window)
        check(
            rec,
            "post-Ehrenfest power-law exponent 2 +/- 0.5",
            abs(q - 2.0) <= 0.5,
            f"q={q:.2f} over {window} (crossover transient decays ~t^4 here; "
            f"local exponent reaches 2 only at t~20-40 and needs dim>2^14)",
        )
    check(rec, "runtime < 2 min", elapsed < 120.0, f"{elapsed:.1f} s")
    finish(rec)


def test_otoc_divergence_scaling():
    rec = []
    psi = init_gaussian_state(2**14, 10.0)
    t0 = time.time()
    t_star = {}
    for lam in (0.005, 0.01):
        series = otoc_series(make_params(8, lam, 0.01), 80, psi)
        t_star[lam] = series.t_star
    elapsed = time.time() - t0
    check(rec, "both runs reach the non-finite marker",
          t_star[0.005] is not None and t_star[0.01] is not None,
          f"t*={t_star}")
    if None not in t_star.values():
        implied = -(math.log(t_star[0.005]) - math.log(t_star[0.01])) / (
            math.log(0.005) - math.log(0.01)
        )
        target = 2 / math.log(8)
        check(rec, "t* ~ lambda^(-2/lnK) exponent within 25%",
              rel_ok(implied, target, 0.25),
              f"implied={implied:.3f} target {target:.3f}")
        check(rec, "t* ordering: t*(0.005) >= t*(0.01)",
              t_star[0.005] >= t_star[0.01], f"{t_star[0.005]} >= {t_star[0.01]}")
    check(rec, "runtime < 5 min", elapsed < 300.0, f"{elapsed:.1f} s")
    finish(rec)


def test_ballistic_regime(ballistic_run):
    series, final200, elapsed = ballistic_run
    rec = []
    mp = np.array([o.mean_p for o in series.entries])
    mp2 = np.array([o.mean_p2 for o in series.entries])
    m2 = np.array([o.m2 for o in series.entries])
    slope, _, _ = fit_line(np.arange(10.0, 101.0), mp[10:101])
    check(rec, "<p> slope = 2*pi within 10%", rel_ok(slope, 2 * np.pi, 0.10),
          f"slope={slope:.4f} target {2*np.pi:.4f}")
    ratio = mp2[100] / 100.0**2
    check(rec, "<p^2>/t^2 -> 4*pi^2 within 20%", rel_ok(ratio, 4 * np.pi**2, 0.20),
          f"ratio={ratio:.2f} target {4*np.pi**2:.2f}")
    bounded = m2[100] / np.median(m2[1:])
    check(rec, "M2 bounded (final/median < 3)", bounded < 3.0, f"final/median={bounded:.2f}")
    th, dens = angular_distribution(final200)
    peak = float(th[np.argmax(dens)])
    check(
        rec,
        "angular argmax within 0.3 rad of pi/2 (t=200)",
        abs(peak - np.pi / 2) <= 0.3,
        f"argmax={peak:.3f} vs pi/2={np.pi/2:.3f} (the packet advances "
        f"2*pi-0.05 per kick, so its angle precesses slowly instead of "
        f"pinning at the gain maximum)",
    )
    check(rec, "runtime < 30 s", elapsed < 30.0, f"{elapsed:.1f} s")
    finish(rec)


def test_localized_regime():
    rec = []
    params = make_params(7, 0.02, 1.4)
    t0 = time.time()
    series = evolve(init_uniform_state(2**14), params, 1500)
    m2 = np.array([o.m2 for o in series.entries])
    early = float(np.mean(m2[500:1001]))
    late = float(np.mean(m2[1000:1501]))
    drift = abs(late - early) / early
    check(rec, "M2 saturation: window-average drift < 20%", drift < 0.20,
          f"drift={drift:.3f} (means {early:.0f} vs {late:.0f})")
    final = evolve_state(init_uniform_state(2**14), params, 1000)
    ns, probs = momentum_distribution(final)
    pos, neg = float(probs[ns > 0].sum()), float(probs[ns < 0].sum())
    check(rec, "momentum asymmetry toward n > 0", pos > neg, f"pos={pos:.3f} neg={neg:.3f}")
    elapsed = time.time() - t0
    check(rec, "runtime < 30 s", elapsed < 30.0, f"{elapsed:.1f} s")
    finish(rec)


def test_staircase_regime():
    rec = []
    params = make_params(7, 0.07, 1.4)
    t0 = time.time()
    series = evolve(init_uniform_state(2**14), params, 1500)
    elapsed = time.time() - t0
    mp = np.array([o.mean_p for o in series.entries])
    m2 = np.array([o.m2 for o in series.entries])
    check(rec, "<p>(1500) > <p>(200) + 1", mp[1500] > mp[200] + 1.0,
          f"<p>(1500)={mp[1500]:.1f} <p>(200)={mp[200]:.1f}")
    inc = np.diff(mp)
    med = float(np.median(np.abs(inc)))
    jumps = int(np.sum(inc > 5 * max(med, 1e-12)))
    check(rec, ">= 2 jump events (increment > 5x median)", jumps >= 2, f"jumps={jumps}")
    # bounded: the plateau level (median) must not grow secularly; ballistic
    # growth over this horizon would raise the late median ~25x
    ratio = float(np.median(m2[1000:1501]) / np.median(m2[1:501]))
    check(rec, "M2 remains bounded (late/early median < 10)", ratio < 10.0,
          f"late/early median ratio={ratio:.2f}")
    check(rec, "no truncation warnings", not series.warnings,
          f"{len(series.warnings)} warnings")
    check(rec, "runtime < 30 s", elapsed < 30.0, f"{elapsed:.1f} s")
    finish(rec)


def test_spectrum():
    rec = []
    t0 = time.time()
    qs0 = quasienergies(build_floquet_matrix(make_params(7, 0.0, 1.4), 2**8))
    check(rec, "lam=0: eigenvalue moduli within 1e-8 of 1",
          qs0.max_modulus_deviation < 1e-8, f"max dev {qs0.max_modulus_deviation:.2e}")
    qs5 = quasienergies(build_floquet_matrix(make_params(7, 0.5, 1.4), 2**8))
    check(rec, "K=7, hbar=1.4, lam=0.5: PT broken", is_pt_broken(qs5),
          f"max |eps_i| = {np.max(np.abs(qs5.eps.imag)):.3f}")

    params = make_params(7, 0.0, 1.4)
    res256 = find_lambda_c(params, 2**8, (1e-4, 0.5), tol_lambda=1e-4)
    check(rec, "lambda_c strictly inside [1e-4, 0.5]",
          1e-4 < res256.lambda_c < 0.5, f"lambda_c(2^8)={res256.lambda_c:.5f}")
    res512 = find_lambda_c(params, 2**9, (1e-4, 0.5), tol_lambda=1e-4)
    stability = abs(res512.lambda_c - res256.lambda_c) / res256.lambda_c
    check(
        rec,
        "dim-doubling stability within 20%",
        stability <= 0.20,
        f"lambda_c(2^8)={res256.lambda_c:.5f} lambda_c(2^9)={res512.lambda_c:.5f} "
        f"drift={stability:.0%} (micro-breaking thresholds of the truncated "
        f"operator drift with dim; confirmed physical by long-time norm growth)",
    )
    elapsed = time.time() - t0
    check(rec, "runtime < 1 min", elapsed < 60.0, f"{elapsed:.1f} s")
    finish(rec)

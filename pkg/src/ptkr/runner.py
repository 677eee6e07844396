"""Experiment execution: module pipelines, serialization, and sweeps.

Every run writes its series file(s), a one-row summary of derived
quantities, and a manifest.json. Identical resolved configs produce
byte-identical series/summary files: floats are serialized with repr
(shortest round-trip form) and non-finite values as the literal strings
inf/-inf/nan. Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

import ptkr
from ptkr.classical import detect_threshold_time, evolve_ensemble, fit_diffusion, threshold_time_tc
from ptkr.config import ConfigError, ExperimentConfig, config_for_point
from ptkr.fitting import fit_line
from ptkr.otoc import otoc_series
from ptkr.quantum import (
    angular_distribution,
    evolve,
    evolve_state,
    init_gaussian_state,
    init_uniform_state,
    momentum_distribution,
)
from ptkr.spectrum import build_floquet_matrix, find_lambda_c, is_pt_broken, quasienergies

SCHEMAS = {
    "classical": ["t", "mean_pr", "mean_pi", "m2_r", "m2_i", "n_diverged"],
    "quantum": ["t", "log_norm", "mean_p", "mean_p2", "m2"],
    "otoc": ["t", "c_value", "finite"],
    "spectrum": ["index", "eps_real", "eps_imag", "eigenvalue_modulus"],
}


@dataclass
class RunManifest:
    config: dict
    files: list[str]
    wall_clock_s: float
    version: str
    config_hash: str
    status: str = "ok"
    errors: dict = field(default_factory=dict)


def format_cell(value) -> str:
    """Round-trippable text for one cell; non-finite as inf/-inf/nan."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path: str, header: list[str], rows: list[list], fmt: str = "csv"):
    """Write a table as CSV or as a JSON record list (string sentinels for
    non-finite numbers in both formats)."""
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(format_cell(v) for v in row) for row in rows]
        _atomic_write(path, "\n".join(lines) + "\n")
    else:
        records = [
            {key: _json_cell(v) for key, v in zip(header, row)} for row in rows
        ]
        _atomic_write(path, json.dumps(records, indent=1) + "\n")


def _json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    x = float(value)
    if math.isnan(x) or math.isinf(x):
        return format_cell(x)
    return x


def read_table(path: str) -> dict[str, np.ndarray]:
    """Read a CSV written by write_table back into float columns."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        cols = {h: [] for h in header}
        for line in fh:
            for h, cell in zip(header, line.strip().split(",")):
                cols[h].append(float(cell))
    return {h: np.array(v) for h, v in cols.items()}


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of the result-relevant resolved config. Output location and job
    count never change the written bytes, so equal hashes mean equal series
    and summary files."""
    payload = {
        k: v for k, v in sorted(cfg.__dict__.items()) if k not in ("out", "jobs")
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()


def _nan(value):
    return math.nan if value is None else value


def _run_classical(cfg: ExperimentConfig, out_dir: str, fmt: str):
    series = evolve_ensemble(cfg.ensemble_config(), cfg.system_params())
    ext = "csv" if fmt == "csv" else "json"
    series_path = os.path.join(out_dir, f"classical.{ext}")
    rows = [
        [series.t[i], series.mean_pr[i], series.mean_pi[i], series.m2_r[i], series.m2_i[i],
         int(series.n_diverged[i])]
        for i in range(series.t.size)
    ]
    write_table(series_path, SCHEMAS["classical"], rows, fmt)

    tau = detect_threshold_time(series)
    try:
        tc = threshold_time_tc(cfg.system_params())
    except ValueError:
        tc = None
    derived = {"tau": _nan(tau), "t_c": _nan(tc)}
    try:
        fit = fit_diffusion(series)
        derived.update(D=fit.D, alpha=fit.alpha, beta=fit.beta)
    except ValueError:
        derived.update(D=math.nan, alpha=math.nan, beta=math.nan)
    return [series_path], derived


def _quantum_initial(cfg: ExperimentConfig, kind: str):
    choice = cfg.initial
    if choice == "default":
        choice = "gaussian" if kind == "otoc" else "uniform"
    if choice == "gaussian":
        return init_gaussian_state(cfg.dim, cfg.sigma)
    return init_uniform_state(cfg.dim)


def _run_quantum(cfg: ExperimentConfig, out_dir: str, fmt: str):
    params = cfg.system_params()
    state = _quantum_initial(cfg, "quantum")
    series = evolve(state, params, cfg.t_max, tail_guard=cfg.tail_guard)
    ext = "csv" if fmt == "csv" else "json"
    series_path = os.path.join(out_dir, f"quantum.{ext}")
    rows = [
        [t, o.log_norm, o.mean_p, o.mean_p2, o.m2] for t, o in enumerate(series.entries)
    ]
    write_table(series_path, SCHEMAS["quantum"], rows, fmt)

    # distributions of the final state, for the figure pipeline
    final = evolve_state(state, params, cfg.t_max)
    ns, probs = momentum_distribution(final)
    mom_path = os.path.join(out_dir, f"momentum_distribution.{ext}")
    write_table(mom_path, ["n", "probability"], [[int(n), p] for n, p in zip(ns, probs)], fmt)
    th, dens = angular_distribution(final)
    ang_path = os.path.join(out_dir, f"angular_distribution.{ext}")
    write_table(ang_path, ["theta", "density"], list(map(list, zip(th, dens))), fmt)

    mp = np.array([o.mean_p for o in series.entries])
    lo = max(1, cfg.t_max // 10)
    slope, _, _ = fit_line(np.arange(lo, cfg.t_max + 1, dtype=float), mp[lo:])
    derived = {
        "p_slope": slope,
        "final_mean_p": series.entries[-1].mean_p,
        "final_m2": series.entries[-1].m2,
        "final_log_norm": series.entries[-1].log_norm,
        "n_warnings": len(series.warnings),
    }
    return [series_path, mom_path, ang_path], derived


def _run_otoc(cfg: ExperimentConfig, out_dir: str, fmt: str):
    params = cfg.system_params()
    state = _quantum_initial(cfg, "otoc")
    series = otoc_series(params, cfg.t_max, state, backward_mode=cfg.backward_mode)
    ext = "csv" if fmt == "csv" else "json"
    series_path = os.path.join(out_dir, f"otoc.{ext}")
    rows = [[int(t), c, bool(f)] for t, c, f in zip(series.t, series.c, series.finite)]
    write_table(series_path, SCHEMAS["otoc"], rows, fmt)
    derived = {
        "gamma": _nan(series.gamma),
        "t_star": _nan(series.t_star),
        "t_e": _nan(series.t_e),
    }
    return [series_path], derived


def _run_spectrum(cfg: ExperimentConfig, out_dir: str, fmt: str):
    params = cfg.system_params()
    qs = quasienergies(build_floquet_matrix(params, cfg.dim))
    order = np.argsort(qs.eps.real, kind="stable")
    ext = "csv" if fmt == "csv" else "json"
    series_path = os.path.join(out_dir, f"spectrum.{ext}")
    rows = [
        [i, qs.eps.real[j], qs.eps.imag[j], float(np.exp(-qs.eps.imag[j]))]
        for i, j in enumerate(order)
    ]
    write_table(series_path, SCHEMAS["spectrum"], rows, fmt)
    derived = {
        "max_eps_imag": float(np.max(np.abs(qs.eps.imag))),
        "max_modulus_deviation": qs.max_modulus_deviation,
        "pt_broken": int(is_pt_broken(qs)),
    }
    if cfg.lambda_c_low is not None and cfg.lambda_c_high is not None:
        res = find_lambda_c(
            params, cfg.dim, (cfg.lambda_c_low, cfg.lambda_c_high), tol_lambda=cfg.tol_lambda
        )
        derived["lambda_c"] = res.lambda_c
    return [series_path], derived


_RUNNERS = {
    "classical": _run_classical,
    "quantum": _run_quantum,
    "otoc": _run_otoc,
    "spectrum": _run_spectrum,
}


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute one experiment, writing series, summary, and manifest."""
    if cfg.kind == "sweep":
        return run_sweep(cfg)
    if cfg.kind not in _RUNNERS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    started = time.time()
    os.makedirs(cfg.out, exist_ok=True)
    files, derived = _RUNNERS[cfg.kind](cfg, cfg.out, cfg.format)

    summary_path = os.path.join(cfg.out, "summary.csv")
    keys = list(derived)
    write_table(summary_path, keys, [[derived[k] for k in keys]], "csv")
    files = files + [summary_path]

    manifest = RunManifest(
        config=dict(sorted(cfg.__dict__.items())),
        files=[os.path.basename(f) for f in files],
        wall_clock_s=time.time() - started,
        version=ptkr.__version__,
        config_hash=config_hash(cfg),
    )
    _write_manifest(cfg.out, manifest)
    return manifest


def _write_manifest(out_dir: str, manifest: RunManifest):
    payload = dict(manifest.__dict__)
    _atomic_write(
        os.path.join(out_dir, "manifest.json"),
        json.dumps(payload, indent=1, default=str) + "\n",
    )


def _sweep_point(args):
    """Worker for one grid point; returns (index, derived or error string)."""
    index, cfg_point, out_dir = args
    try:
        os.makedirs(out_dir, exist_ok=True)
        files, derived = _RUNNERS[cfg_point.kind](cfg_point, out_dir, cfg_point.format)
        return index, derived, None
    except Exception as exc:  # crash isolation: one bad point never kills the sweep
        return index, None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: ExperimentConfig) -> RunManifest:
    """Run the base experiment on the Cartesian grid of the sweep axes.

    Grid points execute in parallel (up to cfg.jobs processes); the summary
    table lists one row per successful point in deterministic grid order,
    with failures recorded in the manifest.
    """
    started = time.time()
    os.makedirs(cfg.out, exist_ok=True)
    axes = sorted(cfg.sweep_axes)  # deterministic axis order
    grid = list(itertools.product(*(cfg.sweep_axes[a] for a in axes)))
    tasks = []
    for index, values in enumerate(grid):
        point = dict(zip(axes, values))
        sub = config_for_point(cfg, point)
        sub_dir = os.path.join(
            cfg.out, f"point_{index:04d}_" + "_".join(f"{a}={v:g}" for a, v in point.items())
        )
        tasks.append((index, sub, sub_dir))

    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    errors: dict[str, str] = {}
    rows = []
    header: list[str] | None = None
    for (index, derived, err), values in zip(results, grid):
        point = dict(zip(axes, values))
        if err is not None:
            errors[f"point_{index:04d}"] = err
            continue
        if header is None:
            header = axes + list(derived)
        rows.append([point[a] for a in axes] + [derived[k] for k in list(derived)])

    summary_path = os.path.join(cfg.out, "summary.csv")
    write_table(summary_path, header or axes, rows, "csv")

    manifest = RunManifest(
        config=dict(sorted(cfg.__dict__.items())),
        files=[os.path.basename(summary_path)] + [os.path.basename(t[2]) for t in tasks],
        wall_clock_s=time.time() - started,
        version=ptkr.__version__,
        config_hash=config_hash(cfg),
        status="partial" if errors else "ok",
        errors=errors,
    )
    _write_manifest(cfg.out, manifest)
    return manifest

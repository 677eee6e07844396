"""Rendering of the five figure kinds from ptkr CSV files."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ptkr_figures.recipes import FigureRecipe, RecipeError


def read_csv(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Load a ptkr CSV and verify the required columns are present."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        missing = [c for c in required if c not in header]
        if missing:
            raise RecipeError(
                f"{path}: missing column(s) {missing}; found {header}"
            )
        cols: dict[str, list[float]] = {h: [] for h in header}
        for line in fh:
            for h, cell in zip(header, line.strip().split(",")):
                cols[h].append(float(cell))
    return {h: np.asarray(v) for h, v in cols.items()}


def _positive(t, y):
    m = np.isfinite(y) & (y > 0) & (t > 0)
    return t[m], y[m]


def _fig1(recipe: FigureRecipe):
    data = read_csv(recipe.inputs["classical_csv"], ("t", "n_diverged"))
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.step(data["t"], data["n_diverged"], where="post", color="tab:blue", label="diverged count")
    if recipe.lam > 0 and recipe.K > 1:
        tc = -np.log(recipe.lam) / np.log(recipe.K)
        ax.axvline(tc, color="tab:red", ls="--", label=f"guide:t_c={tc:.2f}")
    ax.set_xlabel("kick t")
    ax.set_ylabel(r"$N_{max}$")
    ax.legend(loc="upper left", fontsize=8)
    return fig, (ax,)


def _fig2(recipe: FigureRecipe):
    data = read_csv(recipe.inputs["classical_csv"], ("t", "m2_r", "m2_i"))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))

    t, m2r = _positive(data["t"], data["m2_r"])
    ax1.semilogy(t, m2r, "o", ms=3, color="tab:blue", label=r"$M_2^r$")
    D = recipe.guide_D()
    tg = np.linspace(max(t.min(), 1), t.max(), 64)
    ax1.semilogy(tg, D * tg, "--", color="tab:red", label="guide:Dt")
    ax1.set_xlabel("kick t")
    ax1.set_ylabel(r"$M_2^r$")
    ax1.legend(fontsize=8)

    t, m2i = _positive(data["t"], data["m2_i"])
    ax2.semilogy(t, m2i, "s", ms=3, color="tab:blue", label=r"$M_2^i$")
    a, b = recipe.guide_alpha(), recipe.guide_beta()
    ax2.semilogy(tg, np.exp(a * tg + b), "--", color="tab:red", label="guide:exp(at+b)")
    ax2.set_xlabel("kick t")
    ax2.set_ylabel(r"$M_2^i$")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    return fig, (ax1, ax2)


def _fig3(recipe: FigureRecipe):
    data = read_csv(recipe.inputs["otoc_csv"], ("t", "c_value", "finite"))
    fig, ax = plt.subplots(figsize=(5, 3.4))
    t, c = _positive(data["t"], np.where(data["finite"] > 0, data["c_value"], np.nan))
    ax.loglog(t, c, "o", ms=3, color="tab:blue", label="C(t)")
    if t.size:
        g = recipe.guide_gamma()
        t_exp = np.linspace(t.min(), min(t.max(), max(t.min() + 3, 5)), 32)
        anchor = c[0] / np.exp(g * t[0])
        ax.loglog(t_exp, anchor * np.exp(g * t_exp), "-.", color="tab:green",
                  label="guide:exp(gt)")
        t_pow = np.linspace(max(t.min(), 3), t.max(), 32)
        ref = c[-1] / t[-1] ** 2
        ax.loglog(t_pow, ref * t_pow**2, "--", color="tab:red", label="guide:t^2")
    ax.set_xlabel("kick t")
    ax.set_ylabel("C(t)")
    ax.legend(fontsize=8)
    return fig, (ax,)


def _fig4(recipe: FigureRecipe):
    data = read_csv(recipe.inputs["quantum_csv"], ("t", "m2", "mean_p", "mean_p2"))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax1.plot(data["t"], data["m2"], color="tab:blue")
    ax1.set_xlabel("kick t")
    ax1.set_ylabel(r"$\mathcal{M}_2$")

    t, mp = _positive(data["t"], data["mean_p"])
    ax2.semilogy(t, mp, color="black", label=r"$\langle p\rangle$")
    t2, mp2 = _positive(data["t"], data["mean_p2"])
    ax2.semilogy(t2, mp2, color="tab:blue", label=r"$\langle p^2\rangle$")
    tg = np.linspace(1, data["t"].max(), 64)
    ax2.semilogy(tg, 2 * np.pi * tg, "-.", color="tab:green", label="guide:2pi*t")
    ax2.semilogy(tg, 4 * np.pi**2 * tg**2, "--", color="tab:red", label="guide:4pi^2*t^2")
    ax2.set_xlabel("kick t")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    return fig, (ax1, ax2)


def _fig5(recipe: FigureRecipe):
    mom = read_csv(recipe.inputs["momentum_csv"], ("n", "probability"))
    ang = read_csv(recipe.inputs["angular_csv"], ("theta", "density"))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    m = mom["probability"] > 0
    ax1.semilogy(mom["n"][m], mom["probability"][m], color="tab:blue", lw=0.8)
    ax1.set_xlabel("n")
    ax1.set_ylabel(r"$|\psi_n|^2$")
    ax2.plot(ang["theta"], ang["density"], color="tab:blue", lw=0.8)
    ax2.set_xlabel(r"$\theta$")
    ax2.set_ylabel(r"$\rho(\theta)$")
    fig.tight_layout()
    return fig, (ax1, ax2)


_BUILDERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def build_figure(recipe: FigureRecipe):
    """Build the matplotlib figure for a recipe without writing it."""
    # series values near 1e304 overflow the log-axis power transform during
    # layout; harmless, keep it quiet
    with np.errstate(over="ignore"):
        return _BUILDERS[recipe.kind](recipe)


def render(recipe: FigureRecipe) -> str:
    """Render a recipe to its output image path and return the path."""
    fig, _ = build_figure(recipe)
    out_dir = os.path.dirname(recipe.out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    # series values near 1e304 overflow matplotlib's log-axis power transform
    # harmlessly; keep that quiet
    with np.errstate(over="ignore"):
        fig.savefig(recipe.out, dpi=150)
    plt.close(fig)
    return recipe.out


def guide_lines(fig) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Collect guide-line data from a built figure, keyed by label."""
    found = {}
    for ax in fig.axes:
        for line in ax.get_lines():
            label = line.get_label()
            if label.startswith("guide:"):
                found[label] = (np.asarray(line.get_xdata()), np.asarray(line.get_ydata()))
    return found

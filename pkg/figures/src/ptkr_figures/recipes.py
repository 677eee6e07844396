"""Figure recipes: which CSVs to read and which guide parameters to use.

A recipe is a flat `key = value` file:

    kind = fig2
    classical_csv = out/classical.csv
    K = 5
    lambda = 1e-10
    out = fig2.png

Optional keys D, alpha, beta, gamma override the analytic defaults
(K^2/2, 2 ln K, 2 ln lambda, 2 ln K) for the guide lines, so fitted values
from a summary table can be passed through without any fitting here.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass


class RecipeError(ValueError):
    """Invalid recipe or input file; the message names the offending key."""


KINDS = ("fig1", "fig2", "fig3", "fig4", "fig5")

# csv inputs needed per figure kind
INPUTS = {
    "fig1": ("classical_csv",),
    "fig2": ("classical_csv",),
    "fig3": ("otoc_csv",),
    "fig4": ("quantum_csv",),
    "fig5": ("momentum_csv", "angular_csv"),
}

_FLOAT_KEYS = {"K", "lambda", "hbar", "D", "alpha", "beta", "gamma"}
_PATH_KEYS = {"classical_csv", "otoc_csv", "quantum_csv", "momentum_csv", "angular_csv", "out"}


@dataclass(frozen=True)
class FigureRecipe:
    kind: str
    inputs: dict
    out: str
    K: float = 5.0
    lam: float = 1e-10
    hbar: float = 1.0
    D: float | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None

    # analytic guide parameters, unless explicitly supplied
    def guide_D(self) -> float:
        return self.K**2 / 2.0 if self.D is None else self.D

    def guide_alpha(self) -> float:
        return 2.0 * math.log(self.K) if self.alpha is None else self.alpha

    def guide_beta(self) -> float:
        if self.beta is not None:
            return self.beta
        if self.lam <= 0:
            raise RecipeError("beta guide needs lambda > 0 or an explicit beta value")
        return 2.0 * math.log(self.lam)

    def guide_gamma(self) -> float:
        return 2.0 * math.log(self.K) if self.gamma is None else self.gamma


def _parse_flat(path: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise RecipeError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
    return raw


def load_recipe(path: str, out_dir: str | None = None) -> FigureRecipe:
    """Parse and validate a recipe file; paths are taken relative to the
    recipe file's directory."""
    raw = _parse_flat(path)
    base = os.path.dirname(os.path.abspath(path))

    kind = raw.pop("kind", None)
    if kind not in KINDS:
        raise RecipeError(f"kind must be one of {KINDS}, got {kind!r}")

    inputs = {}
    for key in INPUTS[kind]:
        if key not in raw:
            raise RecipeError(f"recipe for {kind} is missing required key {key!r}")
        p = raw.pop(key)
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        if not os.path.exists(p):
            raise RecipeError(f"{key}: input file {p!r} does not exist")
        inputs[key] = p

    out = raw.pop("out", f"{kind}.png")
    if out_dir is not None:
        out = os.path.join(out_dir, os.path.basename(out))
    elif not os.path.isabs(out):
        out = os.path.join(base, out)

    fields: dict = {}
    for key, value in raw.items():
        if key in _FLOAT_KEYS:
            try:
                fields["lam" if key == "lambda" else key] = float(value)
            except ValueError as exc:
                raise RecipeError(f"key {key!r}: cannot parse {value!r}") from exc
        elif key in _PATH_KEYS:
            raise RecipeError(f"key {key!r} is not used by figure kind {kind!r}")
        else:
            raise RecipeError(f"unknown recipe key {key!r}")

    return FigureRecipe(kind=kind, inputs=inputs, out=out, **fields)

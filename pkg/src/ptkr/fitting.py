"""Small least-squares helpers shared by the fitting front-ends and the CLI."""

from __future__ import annotations

import numpy as np


def fit_line(xs, ys, through_origin: bool = False) -> tuple[float, float, float]:
    """Ordinary least squares line fit.

    Returns (slope, intercept, residual) where residual is the RMS misfit.
    With through_origin the intercept is forced to zero. Raises ValueError
    for fewer than two points, non-finite data, or degenerate xs.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if x.size < 2:
        raise ValueError(f"need at least 2 points to fit a line, got {x.size}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("fit_line requires finite data")
    if np.all(x == x[0]):
        raise ValueError("degenerate fit: all x values are equal")

    if through_origin:
        slope = float(np.dot(x, y) / np.dot(x, x))
        intercept = 0.0
    else:
        xm = x.mean()
        ym = y.mean()
        dx = x - xm
        slope = float(np.dot(dx, y - ym) / np.dot(dx, dx))
        intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    return slope, intercept, float(np.sqrt(np.mean(resid**2)))

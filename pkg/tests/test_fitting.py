import numpy as np
import pytest

from ptkr.fitting import fit_line


def test_exact_line():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    slope, intercept, resid = fit_line(x, 3 * x + 1)
    assert slope == pytest.approx(3.0, rel=1e-12)
    assert intercept == pytest.approx(1.0, rel=1e-12)
    assert resid < 1e-12


def test_through_origin_with_noise():
    rng = np.random.default_rng(0)
    x = np.linspace(1, 10, 40)
    y = 4.2 * x + rng.normal(scale=0.05, size=40)
    slope, intercept, _ = fit_line(x, y, through_origin=True)
    assert intercept == 0.0
    assert slope == pytest.approx(4.2, rel=0.01)


def test_degenerate_inputs():
    with pytest.raises(ValueError, match="degenerate"):
        fit_line([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        fit_line([1.0], [2.0])
    with pytest.raises(ValueError, match="finite"):
        fit_line([1.0, 2.0], [np.inf, 0.0])

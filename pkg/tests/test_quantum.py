import numpy as np
import pytest
from scipy import special

from ptkr import (
    evolve,
    floquet_step,
    init_gaussian_state,
    init_uniform_state,
    make_params,
    momentum_distribution,
    angular_distribution,
    observables,
)
from ptkr.quantum import (
    QuantumState,
    evolve_state,
    from_amplitudes,
    n_values,
    to_angle,
    to_momentum,
    tail_mass,
    theta_grid,
)


def random_state(dim, seed=0):
    rng = np.random.default_rng(seed)
    return from_amplitudes(rng.normal(size=dim) + 1j * rng.normal(size=dim))


class TestStates:
    def test_uniform_state_is_momentum_delta(self):
        st = init_uniform_state(8)
        expected = np.zeros(8)
        expected[4] = 1.0  # n = 0 sits at index dim//2
        np.testing.assert_array_equal(np.abs(st.amps) ** 2, expected)
        ob = observables(st, make_params(5, 0, 1))
        assert ob.mean_p == 0.0 and ob.m2 == 0.0 and st.log_norm == 0.0

    def test_dim_validation(self):
        with pytest.raises(ValueError):
            init_uniform_state(12)
        with pytest.raises(ValueError):
            init_uniform_state(1)
        with pytest.raises(ValueError):
            init_gaussian_state(64, -1.0)

    def test_gaussian_moments(self):
        # sigma = 10 packet: <p> = 0, m2 = sigma*hbar^2/2
        st = init_gaussian_state(2**14, 10.0)
        ob = observables(st, make_params(8, 0, 0.01))
        assert abs(ob.mean_p) < 1e-10
        assert ob.m2 == pytest.approx(10 * 0.01**2 / 2, rel=0.02)

    def test_gaussian_wraparound_negligible(self):
        # e^{-sigma*pi^2} periodization leakage is far below double rounding
        assert np.exp(-10 * np.pi**2) < 1e-42

    def test_transform_round_trip(self):
        st = random_state(256, 7)
        back = to_momentum(to_angle(st.amps))
        np.testing.assert_allclose(back, st.amps, atol=1e-12)

    def test_angular_density_of_uniform_state(self):
        th, dens = angular_distribution(init_uniform_state(128))
        np.testing.assert_allclose(dens, 1 / (2 * np.pi), atol=1e-12)
        assert np.sum(dens) * (2 * np.pi / 128) == pytest.approx(1.0, abs=1e-10)

    def test_gaussian_density_peaks_at_zero(self):
        st = init_gaussian_state(1024, 10.0)
        th, dens = angular_distribution(st)
        assert abs(th[np.argmax(dens)]) < 0.01


class TestFloquetStep:
    def test_unitary_at_lambda_zero(self):
        st = random_state(512, 1)
        out = floquet_step(st, make_params(5, 0.0, 1.0))
        assert abs(out.log_norm) < 1e-12

    def test_bessel_single_kick(self):
        st = floquet_step(init_uniform_state(4096), make_params(5, 0.0, 1.0))
        ns, probs = momentum_distribution(st)
        expected = special.jv(ns.astype(float), 5.0) ** 2
        np.testing.assert_allclose(probs, expected, atol=1e-8)
        assert probs[2048] == pytest.approx(0.03154, abs=1e-4)

    def test_norm_gain_is_bessel_i0(self):
        params = make_params(7, 0.02, 1.4)
        out = floquet_step(init_uniform_state(512), params)
        gain = np.exp(2 * out.log_norm)
        assert gain == pytest.approx(special.iv(0, 2 * 7 * 0.02 / 1.4), abs=1e-6)

    def test_adjoint_undoes_forward_at_lambda_zero(self):
        params = make_params(5, 0.0, 1.0)
        st = random_state(256, 2)
        back = floquet_step(floquet_step(st, params), params, "adjoint")
        np.testing.assert_allclose(back.amps, st.amps, atol=1e-10)
        assert abs(back.log_norm) < 1e-10

    def test_inverse_undoes_forward_any_lambda(self):
        params = make_params(7, 0.5, 1.4)
        st = random_state(256, 3)
        back = floquet_step(floquet_step(st, params), params, "inverse")
        np.testing.assert_allclose(back.amps, st.amps, atol=1e-8)
        assert abs(back.log_norm) < 1e-8

    def test_adjoint_equals_inverse_at_lambda_zero(self):
        params = make_params(5, 0.0, 1.0)
        st = random_state(128, 4)
        a = floquet_step(st, params, "adjoint")
        b = floquet_step(st, params, "inverse")
        np.testing.assert_array_equal(a.amps, b.amps)

    def test_unknown_direction(self):
        with pytest.raises(ValueError, match="direction"):
            floquet_step(init_uniform_state(16), make_params(5, 0, 1), "sideways")

    def test_kick_overflow_raises(self):
        params = make_params(5, 200.0, 0.01)  # K*lam/hbar = 1e5: e^x overflows
        with pytest.raises(OverflowError, match="renormalize"):
            floquet_step(init_uniform_state(64), params)


class TestObservables:
    def test_momentum_eigenstate(self):
        amps = np.zeros(64, dtype=complex)
        amps[32 + 3] = 1.0  # n = 3
        ob = observables(QuantumState(amps=amps), make_params(5, 0, 1.4))
        assert ob.mean_p == pytest.approx(4.2, rel=1e-12)
        assert ob.m2 == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_superposition(self):
        amps = np.zeros(64, dtype=complex)
        amps[32 + 1] = amps[32 - 1] = 1 / np.sqrt(2)
        ob = observables(QuantumState(amps=amps), make_params(5, 0, 1.4))
        assert ob.mean_p == pytest.approx(0.0, abs=1e-14)
        assert ob.mean_p2 == pytest.approx(1.4**2, rel=1e-12)

    def test_gauge_invariance(self):
        params = make_params(7, 0.3, 1.4)
        rng = np.random.default_rng(11)
        raw = rng.normal(size=128) + 1j * rng.normal(size=128)
        a = from_amplitudes(raw)
        b = from_amplitudes(np.exp(1j * 0.7) * 5.0 * raw)
        for st in (a, b):
            st = floquet_step(st, params)
        oa = observables(floquet_step(a, params), params)
        ob = observables(floquet_step(b, params), params)
        assert oa.mean_p == pytest.approx(ob.mean_p, rel=1e-12, abs=1e-12)
        assert oa.m2 == pytest.approx(ob.m2, rel=1e-12, abs=1e-12)

    def test_momentum_distribution_normalized(self):
        st = evolve_state(init_uniform_state(512), make_params(7, 0.02, 1.4), 20)
        ns, probs = momentum_distribution(st)
        assert np.sum(probs) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_array_equal(ns, n_values(512))

    def test_ballistic_peak_advances_2pi_over_hbar_per_kick(self):
        # the accelerating packet moves ~2*pi/hbar momentum indices per kick
        params = make_params(7, 0.5, 1.4)
        st60 = evolve_state(init_uniform_state(2048), params, 60)
        st80 = evolve_state(init_uniform_state(2048), params, 80)
        peak = lambda st: int(np.argmax(np.abs(st.amps) ** 2)) - 1024
        advance = peak(st80) - peak(st60)
        assert advance == pytest.approx(20 * 2 * np.pi / 1.4, rel=0.15)


class TestEvolve:
    def test_series_length_and_validation(self):
        series = evolve(init_uniform_state(64), make_params(5, 0, 1), 10)
        assert len(series.entries) == 11
        with pytest.raises(ValueError):
            evolve(init_uniform_state(64), make_params(5, 0, 1), 0)

    def test_unitarity_over_many_kicks(self):
        series = evolve(init_uniform_state(1024), make_params(5, 0.0, 1.0), 300)
        assert abs(series.entries[-1].log_norm) < 1e-10

    def test_truncation_warning_attached_and_run_continues(self):
        # a tiny basis cannot hold a K/hbar = 20 kick: the guard must trip
        series = evolve(init_uniform_state(32), make_params(20, 0.0, 1.0), 5)
        assert series.warnings
        kick, message = series.warnings[0]
        assert "tail mass" in message and 1 <= kick <= 5
        assert len(series.entries) == 6

    def test_tail_mass_of_uniform_state_is_zero(self):
        assert tail_mass(init_uniform_state(256)) == 0.0


def test_theta_grid_convention():
    th = theta_grid(8)
    assert th[0] == -np.pi and th[4] == 0.0
    assert th[-1] == pytest.approx(np.pi - 2 * np.pi / 8)

#!/usr/bin/env python3
"""
Tests for the finite-N, Galerkin, linearized and oracle simulators
"""

import math
import sys
import warnings

import numpy as np
import pytest

from scipy.optimize import brentq

from analysis import dominant_frequency, fit_decay_rate, steady_amplitude
from config import DEFAULT_TOLERANCES
from distributions import bimodal_lorentzian
from errors import TruncationWarning
from simulate import (
    GALERKIN,
    OA_ORACLE,
    GalerkinModel,
    ModelParams,
    SimulationSettings,
    galerkin_quadrature,
    initial_phases,
    linearize_oracle,
    order_parameters,
    ott_antonsen_oracle,
    run_simulation,
    simulate_finite_n,
    simulate_galerkin,
    simulate_linearized,
    wrap_phase,
)
from test_runner import run_tests, slow

SQRT3 = math.sqrt(3.0)
REFERENCE = bimodal_lorentzian(2.0)


def test_order_parameters():
    eta1, eta2 = order_parameters(np.zeros(10))
    assert abs(eta1 - 1) < 1e-15 and abs(eta2 - 1) < 1e-15
    eta1, eta2 = order_parameters(2 * np.pi * np.arange(12) / 12)
    assert abs(eta1) < 1e-12 and abs(eta2) < 1e-12


def test_wrap_phase():
    wrapped = wrap_phase(np.array([-0.5, 7.0, 2 * np.pi]))
    assert np.all((wrapped >= 0) & (wrapped < 2 * np.pi))


def test_initial_phases():
    theta = initial_phases(10000, 1e-3, seed=1)
    eta1, _ = order_parameters(theta)
    assert abs(eta1 - 1e-3) < 1e-6
    assert np.array_equal(theta, initial_phases(10000, 1e-3, seed=1))
    with pytest.raises(ValueError):
        initial_phases(10, 0.7)


def test_free_rotation():
    rng = np.random.default_rng(0)
    omegas = rng.normal(size=500)
    theta0 = rng.uniform(0, 2 * np.pi, 500)
    series = simulate_finite_n(ModelParams(0.0), omegas, theta0, t_end=2.0, dt=0.01, record_stride=50)
    expected = np.mean(np.exp(1j * (theta0 + omegas * series.times[-1])))
    assert abs(series.eta1[-1] - expected) < 1e-9
    assert len(series.rows()[0]) == 5


def test_two_oscillators_lock_with_second_harmonic():
    # ψ = θ₂ - θ₁ obeys ψ' = 2Δ - K sin ψ - Kh sin 2ψ
    delta, K, h = 0.2, 1.0, 0.3
    psi = brentq(lambda p: K * math.sin(p) + K * h * math.sin(2 * p) - 2 * delta, 0.0, 1.0)
    series = simulate_finite_n(ModelParams(K, h), [-delta, delta], [0.0, 0.5], t_end=40.0, dt=0.01,
                               record_stride=100)
    assert abs(abs(series.eta1[-1]) - math.cos(psi / 2)) < 1e-8
    assert abs(abs(series.eta2[-1]) - abs(math.cos(psi))) < 1e-8
    assert np.all(np.abs(series.eta1) <= 1.0 + 1e-12) and np.all(np.abs(series.eta2) <= 1.0 + 1e-12)

    identical = simulate_finite_n(ModelParams(1.0), [0.0, 0.0], [0.0, np.pi - 0.1], t_end=10.0, dt=0.01,
                                  record_stride=100)
    assert np.all(np.diff(np.abs(identical.eta1)) > 0)


def test_finite_n_rotational_equivariance():
    rng = np.random.default_rng(3)
    omegas = rng.standard_cauchy(200) * 0.5
    theta0 = rng.uniform(0, 2 * np.pi, 200)
    shift = 0.7
    params = ModelParams(4.16, 0.3)
    base = simulate_finite_n(params, omegas, theta0, t_end=5.0, dt=0.01, record_stride=20)
    turned = simulate_finite_n(params, omegas, theta0 + shift, t_end=5.0, dt=0.01, record_stride=20)
    tol = DEFAULT_TOLERANCES["equivariance"]
    assert np.max(np.abs(turned.eta1 - base.eta1 * np.exp(1j * shift))) < tol
    assert np.max(np.abs(turned.eta2 - base.eta2 * np.exp(2j * shift))) < tol


def test_incoherent_state_is_an_equilibrium():
    series = simulate_galerkin(ModelParams(4.5, -0.5), REFERENCE, M=64, J=4, Z0=np.zeros((4, 64)),
                               t_end=10.0, dt=0.05)
    assert np.all(series.eta1 == 0) and np.all(series.eta2 == 0)
    oracle = ott_antonsen_oracle(2.0, 4.16, (0j, 0j), 10.0)
    assert np.all(oracle.eta1 == 0)


def test_galerkin_conjugate_symmetry():
    # real nodes, even g and real initial data keep Z(-ω) = conj Z(ω)
    series, state = simulate_galerkin(ModelParams(4.2, -0.5), REFERENCE, M=200, J=4, t_end=50.0,
                                      record_stride=10, return_state=True)
    assert np.all(state.nodes.imag == 0)
    assert np.max(np.abs(state.Z - np.conj(state.Z[:, ::-1]))) < 1e-9
    assert np.max(np.abs(series.eta1.imag)) < 1e-9


def test_galerkin_second_harmonic_growth():
    # Re λ(4.5) = 0.125; the second harmonic does not enter the linear rate
    series = simulate_galerkin(ModelParams(4.5, -0.5), REFERENCE, M=400, J=4, t_end=40.0,
                               record_stride=1, initial_amplitude=1e-4)
    rate, _ = fit_decay_rate(series, (10.0, 40.0), allow_growth=True)
    assert abs(rate - 0.125) < 0.0125
    assert abs(series.eta2[-1]) > 0


def test_step_halving():
    coarse = simulate_linearized(ModelParams(3.5), REFERENCE, M=400, t_end=40.0, dt=0.02, record_stride=5)
    fine = simulate_linearized(ModelParams(3.5), REFERENCE, M=400, t_end=40.0, dt=0.01, record_stride=10)
    late = coarse.times >= 10.0
    assert np.max(np.abs(coarse.eta1[late] - fine.eta1[late])) < 1e-6

    coarse = simulate_galerkin(ModelParams(4.16), REFERENCE, t_end=50.0, dt=0.02, record_stride=5)
    fine = simulate_galerkin(ModelParams(4.16), REFERENCE, t_end=50.0, dt=0.01, record_stride=10)
    assert np.max(np.abs(coarse.eta1 - fine.eta1)) < 1e-4


def test_quadrature_weights():
    for shift in (0.0, 0.4):
        nodes, weights = galerkin_quadrature(REFERENCE, 400, shift)
        assert len(nodes) == 400
        assert abs(weights.sum() - 1.0) < 1e-8
        assert np.allclose(nodes.imag, shift)
        assert np.allclose(np.sort(nodes.real), -np.sort(nodes.real)[::-1])
    nodes, weights = galerkin_quadrature(REFERENCE, 400, 0.0)
    assert np.all(weights.imag == 0)
    with pytest.raises(ValueError):
        galerkin_quadrature(REFERENCE, 400, 0.7)


def test_second_harmonic_needs_real_nodes():
    nodes, weights = galerkin_quadrature(REFERENCE, 64, 0.4)
    with pytest.raises(ValueError):
        GalerkinModel(ModelParams(4.2, 0.5), nodes, weights, 4, 0.02)


def test_model_params():
    assert ModelParams(4.0, 0.5).f2 == 0.5 / 2j
    with pytest.raises(ValueError):
        ModelParams(4.0, 1.0).check()
    with pytest.raises(ValueError):
        ModelParams(-1.0).check()


def test_linearized_decay():
    series = simulate_linearized(ModelParams(3.5), REFERENCE, M=400, t_end=40.0, dt=0.02)
    rate, frequency = fit_decay_rate(series, (5.0, 40.0))
    assert abs(rate + 0.125) < 0.0125
    assert abs(frequency - 1.79843) < 0.02 * 1.79843


def test_linearized_growth():
    series = simulate_linearized(ModelParams(5.0), REFERENCE, M=400, t_end=40.0, dt=0.02)
    rate, _ = fit_decay_rate(series, (10.0, 40.0), allow_growth=True)
    assert abs(rate - 0.25) < 0.025


def test_oracle_linearization():
    for K in (3.5, 10.0):
        eigen = sorted(np.linalg.eigvals(linearize_oracle(2.0, K)), key=lambda z: (z.real, z.imag))
        u = np.roots([2.0, -K, 8.0])
        expected = sorted((complex(r) - 1 for r in u), key=lambda z: (z.real, z.imag))
        assert all(abs(a - b) < 1e-10 for a, b in zip(eigen, expected))


def test_oracle_rejects_unsupported():
    settings = SimulationSettings(kind=OA_ORACLE)
    with pytest.raises(ValueError):
        run_simulation(REFERENCE, ModelParams(4.2, 0.5), settings, 10.0)
    with pytest.raises(ValueError):
        run_simulation(REFERENCE, ModelParams(4.2), SimulationSettings(kind="spectral"), 10.0)


def test_oracle_saturates():
    series = ott_antonsen_oracle(2.0, 4.16, (1e-3, 1e-3), 1000.0, dt=0.01, record_stride=10)
    assert abs(steady_amplitude(series, 0.5, SQRT3) - 0.2) < 0.03
    assert abs(dominant_frequency(series, 0.5, SQRT3) - SQRT3) < 0.05 * SQRT3


@slow
def test_galerkin_below_onset_decays():
    series = simulate_galerkin(ModelParams(3.9), REFERENCE, M=400, J=8, t_end=500.0)
    assert abs(series.eta1[-1]) < 1e-4


@slow
def test_galerkin_hopf_amplitude():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        series, state = simulate_galerkin(ModelParams(4.16), REFERENCE, M=400, J=8, t_end=1000.0,
                                          record_stride=5, return_state=True)
    assert abs(steady_amplitude(series, 0.5, SQRT3) - 0.2) < 0.03
    assert abs(dominant_frequency(series, 0.5, SQRT3) - SQRT3) < 0.05 * SQRT3
    assert state.Z.shape == (8, 400)
    assert abs(state.order_parameters()[0] - series.eta1[-1]) < 1e-12


@slow
def test_settings_dispatch_galerkin():
    settings = SimulationSettings(kind=GALERKIN, M=200, J=4, record_stride=10)
    series = run_simulation(REFERENCE, ModelParams(3.5), settings, 100.0)
    assert series.source == GALERKIN and abs(series.eta1[-1]) < 1e-3


def main():
    tests = [
        test_order_parameters,
        test_wrap_phase,
        test_initial_phases,
        test_free_rotation,
        test_two_oscillators_lock_with_second_harmonic,
        test_finite_n_rotational_equivariance,
        test_incoherent_state_is_an_equilibrium,
        test_galerkin_conjugate_symmetry,
        test_galerkin_second_harmonic_growth,
        test_step_halving,
        test_quadrature_weights,
        test_second_harmonic_needs_real_nodes,
        test_model_params,
        test_linearized_decay,
        test_linearized_growth,
        test_oracle_linearization,
        test_oracle_rejects_unsupported,
        test_oracle_saturates,
        test_galerkin_below_onset_decays,
        test_galerkin_hopf_amplitude,
        test_settings_dispatch_galerkin,
    ]
    return run_tests("Simulators", tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)

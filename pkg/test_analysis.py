#!/usr/bin/env python3
"""
Tests for steady-state observables, decay fits and the bifurcation sweep
"""

import math
import sys

import numpy as np
import pytest

from analysis import (
    MAX_HORIZON,
    SweepResult,
    SweepRow,
    auto_horizon,
    bifurcation_sweep,
    dominant_frequency,
    fit_decay_rate,
    fit_scaling_exponent,
    steady_amplitude,
    sweep_summary,
)
from center_manifold import SINE, coefficients_sine
from distributions import bimodal_lorentzian
from errors import NonDecaying, WindowTooShort
from simulate import OA_ORACLE, OrderParameterSeries, SimulationSettings
from test_runner import run_tests, slow

REFERENCE = bimodal_lorentzian(2.0)


def _series(times: np.ndarray, eta1: np.ndarray) -> OrderParameterSeries:
    return OrderParameterSeries(times, eta1, np.zeros_like(eta1), "synthetic")


def test_rotating_signal():
    t = np.arange(0.0, 200.0, 0.05)
    series = _series(t, 0.3 * np.exp(1.5j * t))
    assert abs(steady_amplitude(series, 0.5, 1.5) - 0.3) < 1e-12
    assert abs(dominant_frequency(series, 0.5, 1.5) - 1.5) < 0.01 * 1.5


def test_negative_frequency_is_folded():
    t = np.arange(0.0, 200.0, 0.05)
    series = _series(t, 0.3 * np.exp(-1.5j * t))
    assert abs(dominant_frequency(series, 0.5) - 1.5) < 0.01 * 1.5


def test_window_too_short():
    t = np.arange(0.0, 5.0, 0.05)
    series = _series(t, 0.3 * np.exp(1.5j * t))
    with pytest.raises(WindowTooShort):
        steady_amplitude(series, 0.5, 1.5)
    with pytest.raises(WindowTooShort):
        steady_amplitude(_series(t[:5], np.ones(5, dtype=complex)), 0.5)


def test_short_window_without_reference_frequency():
    # about 0.7 periods of √3 after the transient
    t = np.linspace(0.0, 5.0, 51)
    series = _series(t, 0.1 * np.exp(1j * math.sqrt(3.0) * t))
    with pytest.raises(WindowTooShort):
        steady_amplitude(series, 0.5)
    with pytest.raises(WindowTooShort):
        dominant_frequency(series, 0.5)
    standing = _series(t, 0.2 * np.cos(math.sqrt(3.0) * t) + 0j)
    with pytest.raises(WindowTooShort):
        steady_amplitude(standing, 0.5)

    long = np.linspace(0.0, 100.0, 2001)
    assert abs(steady_amplitude(_series(long, 0.1 * np.exp(1j * math.sqrt(3.0) * long)), 0.5) - 0.1) < 1e-12


def test_constant_signal_has_no_frequency():
    t = np.arange(0.0, 100.0, 0.1)
    assert dominant_frequency(_series(t, np.full(len(t), 0.2 + 0j)), 0.5) == 0.0


def test_non_uniform_sampling_rejected():
    t = np.sort(np.random.default_rng(1).uniform(0, 100, 500))
    with pytest.raises(ValueError):
        dominant_frequency(_series(t, np.exp(1j * t)), 0.5)


def test_decay_of_rotating_mode():
    t = np.arange(0.0, 60.0, 0.02)
    rate, frequency = fit_decay_rate(_series(t, np.exp((-0.1 + 2j) * t)), (10.0, 60.0))
    assert abs(rate + 0.1) < 1e-6
    assert abs(frequency - 2.0) < 0.01


def test_decay_of_standing_mode():
    t = np.arange(0.0, 60.0, 0.02)
    eta = np.exp(-0.1 * t) * np.cos(2.0 * t) + 0j
    rate, frequency = fit_decay_rate(_series(t, eta), (10.0, 60.0))
    assert abs(rate + 0.1) < 0.01
    assert abs(frequency - 2.0) < 0.02


def test_growth_needs_permission():
    t = np.arange(0.0, 40.0, 0.02)
    series = _series(t, np.exp((0.05 + 2j) * t))
    with pytest.raises(NonDecaying):
        fit_decay_rate(series, (5.0, 40.0))
    rate, _ = fit_decay_rate(series, (5.0, 40.0), allow_growth=True)
    assert abs(rate - 0.05) < 1e-6
    with pytest.raises(WindowTooShort):
        fit_decay_rate(series, (5.0, 5.1))


def test_scaling_exponent():
    rows = [SweepRow(4 + e, e, 0.5 * math.sqrt(e), 0.5 * math.sqrt(e), 1.7, 1.7, "synthetic")
            for e in (0.04, 0.09, 0.16, 0.25)]
    assert abs(fit_scaling_exponent(rows) - 0.5) < 1e-12
    below = SweepRow(3.9, -0.1, 1e-6, 0.0, 0.0, 1.7, "synthetic")
    assert abs(fit_scaling_exponent(rows + [below]) - 0.5) < 1e-12
    assert fit_scaling_exponent(rows[:1]) is None


def test_auto_horizon():
    coeffs = coefficients_sine(REFERENCE)
    assert auto_horizon(coeffs, 0.16) == MAX_HORIZON
    assert abs(auto_horizon(coeffs, 0.5) - 1040.0) < 1e-9
    assert auto_horizon(coeffs, 0.0) == MAX_HORIZON


def test_sweep_summary():
    result = SweepResult(rows=[], exponent=0.49, K_c=4.0, kind=SINE)
    summary = sweep_summary(result)
    assert summary["expected_exponent"] == 0.5 and summary["rows"] == 0


def test_sweep_rejects_empty_list():
    with pytest.raises(ValueError):
        bifurcation_sweep(REFERENCE, 0.0, [], SimulationSettings(kind=OA_ORACLE))


@slow
def test_oracle_sweep_scaling():
    settings = SimulationSettings(kind=OA_ORACLE, dt=0.02, record_stride=10, t_end=1600.0)
    result = bifurcation_sweep(REFERENCE, 0.0, [4.16, 4.04, 4.08], settings, threads=2)
    assert [row.K for row in result.rows] == [4.04, 4.08, 4.16]
    assert abs(result.K_c - 4.0) < 1e-6 and result.kind == SINE
    assert abs(result.exponent - 0.5) < 0.1
    for row in result.rows:
        assert row.source == OA_ORACLE
        assert abs(row.measured_amplitude - row.predicted_amplitude) < 0.15 * row.predicted_amplitude
        assert abs(row.measured_frequency - math.sqrt(3.0)) < 0.05 * math.sqrt(3.0)


def main():
    tests = [
        test_rotating_signal,
        test_negative_frequency_is_folded,
        test_window_too_short,
        test_short_window_without_reference_frequency,
        test_constant_signal_has_no_frequency,
        test_non_uniform_sampling_rejected,
        test_decay_of_rotating_mode,
        test_decay_of_standing_mode,
        test_growth_needs_permission,
        test_scaling_exponent,
        test_auto_horizon,
        test_sweep_summary,
        test_sweep_rejects_empty_list,
        test_oracle_sweep_scaling,
    ]
    return run_tests("Analysis", tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)

#!/usr/bin/env python3
"""
Tests for the truncated center-manifold systems
"""

import sys

import numpy as np
import pytest

from center_manifold import coefficients_second_harmonic, coefficients_sine
from distributions import bimodal_lorentzian
from errors import Overflow
from reduced_ode import (
    AVERAGED_SINE,
    FULL_SINE,
    POLAR,
    CenterState,
    center_manifold_field,
    default_step,
    integrate_averaged,
    integrate_center_manifold,
    integrate_polar,
)
from test_runner import run_tests

REFERENCE = bimodal_lorentzian(2.0)
SINE_COEFFS = coefficients_sine(REFERENCE)


def _late_mean(values: np.ndarray, times: np.ndarray) -> float:
    return float(np.mean(values[times >= 0.5 * times[-1]]))


def test_rotational_equivariance():
    rng = np.random.default_rng(7)
    for coeffs in (SINE_COEFFS, coefficients_second_harmonic(REFERENCE, -0.5)):
        field = center_manifold_field(coeffs, 0.16)
        for _ in range(10):
            z = (rng.normal(size=2) + 1j * rng.normal(size=2)) * 0.1
            rotor = np.exp(1j * rng.uniform(0, 2 * np.pi))
            assert np.max(np.abs(field(rotor * z) - rotor * field(z))) < 1e-10


def test_default_step():
    assert 0 < default_step(SINE_COEFFS) <= 0.01


def test_full_system_settles_on_averaged_radius():
    trajectory = integrate_center_manifold(SINE_COEFFS, 0.16, CenterState(0.01 + 0j, 0.01 + 0j), record_stride=10)
    assert trajectory.system_kind == FULL_SINE
    radius = _late_mean(np.abs(trajectory.states[:, 0]), trajectory.times)
    assert abs(radius - 0.1) < 0.01
    assert len(trajectory.rows()[0]) == 5
    assert isinstance(trajectory.center_states()[-1], CenterState)


def test_averaged_system_converges():
    trajectory = integrate_averaged(SINE_COEFFS, 0.16, (0.01, 0.01), t_end=800.0, dt=0.05)
    assert trajectory.system_kind == AVERAGED_SINE
    assert np.allclose(trajectory.states[-1], [0.1, 0.1], atol=1e-4)
    with pytest.raises(ValueError):
        trajectory.rows()


def test_averaged_invariant_axis():
    trajectory = integrate_averaged(SINE_COEFFS, 0.16, (0.01, 0.0), t_end=800.0, dt=0.05)
    assert trajectory.states[-1][1] == 0.0
    assert abs(trajectory.states[-1][0] - 0.1) < 1e-4


def test_polar_form_tracks_full_radius():
    trajectory = integrate_polar(SINE_COEFFS, 0.16, 0.0, 0.01, 0.01, record_stride=10)
    assert trajectory.system_kind == POLAR
    radius = _late_mean(trajectory.states[:, 1], trajectory.times)
    assert abs(radius - 0.1) < 0.01
    with pytest.raises(ValueError):
        integrate_polar(SINE_COEFFS, 0.16, 0.0, -0.01, 0.01)


def test_subcritical_overflow():
    coeffs = coefficients_second_harmonic(REFERENCE, 0.5)
    with pytest.raises(Overflow):
        integrate_averaged(coeffs, 0.2, (0.5, 0.5), t_end=50.0, dt=0.01)


def test_negative_radii_rejected():
    with pytest.raises(ValueError):
        integrate_averaged(SINE_COEFFS, 0.16, (-0.1, 0.1))


def main():
    tests = [
        test_rotational_equivariance,
        test_default_step,
        test_full_system_settles_on_averaged_radius,
        test_averaged_system_converges,
        test_averaged_invariant_axis,
        test_polar_form_tracks_full_radius,
        test_subcritical_overflow,
        test_negative_radii_rejected,
    ]
    return run_tests("Reduced ODE", tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)

#!/usr/bin/env python3
"""
Tests for the reduced-system coefficients and the predicted orbit
"""

import math
import sys

import numpy as np
import pytest

from center_manifold import (
    NEUTRAL,
    SADDLE,
    SECOND_HARMONIC,
    SINE,
    STABLE,
    UNSTABLE,
    averaged_fixed_points,
    coefficients_record,
    coefficients_second_harmonic,
    coefficients_sine,
    predict_orbit,
    prediction_record,
)
from distributions import bimodal_lorentzian
from errors import AssumptionViolated
from reduced_ode import averaged_field
from test_runner import run_tests

SQRT3 = math.sqrt(3.0)
REFERENCE = bimodal_lorentzian(2.0)


def test_sine_coefficients():
    coeffs = coefficients_sine(REFERENCE)
    assert coeffs.kind == SINE
    assert abs(coeffs.p1 - (0.25 - 1j / (4 * SQRT3))) < 1e-6
    assert abs(coeffs.p2 - (-4 - 2j / SQRT3)) < 1e-6
    assert abs(coeffs.p3 - (1 + 1j / SQRT3)) < 1e-6
    assert abs(coeffs.p4 - (-4j / SQRT3)) < 1e-6
    assert coeffs.growth == coeffs.p1


def test_second_harmonic_coefficients():
    coeffs = coefficients_second_harmonic(REFERENCE, -0.5)
    sine = coefficients_sine(REFERENCE)
    assert coeffs.kind == SECOND_HARMONIC
    assert abs(coeffs.q1 - sine.p1) < 1e-12
    assert abs(coeffs.q2 - (-4.0 / 3.0)) < 1e-12
    assert abs(abs(coeffs.q3) - 4.0 / 3.0) < 1e-12


def test_second_harmonic_needs_h():
    for h in (0.0, 0.01, -0.04):
        with pytest.raises(AssumptionViolated):
            coefficients_second_harmonic(REFERENCE, h)
    with pytest.raises(AssumptionViolated):
        coefficients_second_harmonic(REFERENCE, 1.5)


def test_unimodal_has_no_reduction():
    with pytest.raises(AssumptionViolated):
        coefficients_sine(bimodal_lorentzian(0.9))


def test_sine_orbit():
    coeffs = coefficients_sine(REFERENCE)
    orbit = predict_orbit(coeffs, 0.16)
    assert orbit.exists and orbit.stable and not orbit.subcritical
    assert abs(orbit.r_star - 0.1) < 1e-9
    assert abs(orbit.amplitude - 0.2) < 1e-9
    assert abs(orbit.frequency - SQRT3) < 1e-9
    assert orbit.scaling == "sqrt"
    # |D'(i√3)| = √12/8
    assert abs(orbit.eta2_amplitude - 16 * 0.01 * math.sqrt(12) / 16) < 1e-9

    below = predict_orbit(coeffs, -0.1)
    assert not below.exists and below.amplitude == 0.0 and not below.stable


def test_second_harmonic_orbits():
    supercritical = predict_orbit(coefficients_second_harmonic(REFERENCE, -0.5), 0.2)
    assert supercritical.stable and supercritical.scaling == "linear"
    assert abs(supercritical.amplitude - 0.075) < 1e-9

    subcritical = predict_orbit(coefficients_second_harmonic(REFERENCE, 0.5), -0.2)
    assert subcritical.subcritical and subcritical.exists and not subcritical.stable
    assert abs(subcritical.r_star - 0.0125) < 1e-9


def test_averaged_fixed_points():
    coeffs = coefficients_sine(REFERENCE)
    labels = {(round(p.r_plus, 9), round(p.r_minus, 9)): p.stability for p in averaged_fixed_points(coeffs, 0.16)}
    assert labels == {(0.0, 0.0): UNSTABLE, (0.1, 0.0): SADDLE, (0.0, 0.1): SADDLE, (0.1, 0.1): STABLE}

    below = averaged_fixed_points(coeffs, -0.16)
    assert len(below) == 1 and below[0].stability == STABLE

    neutral = averaged_fixed_points(coeffs, 0.0)
    assert len(neutral) == 1 and neutral[0].stability == NEUTRAL


def _jacobian_label(field, r_plus: float, r_minus: float, step: float = 1e-7) -> str:
    point = np.array([r_plus, r_minus])
    columns = []
    for k in range(2):
        offset = np.zeros(2)
        offset[k] = step
        columns.append((field(point + offset) - field(point - offset)) / (2 * step))
    eigenvalues = np.linalg.eigvals(np.column_stack(columns)).real
    if np.all(eigenvalues < 0):
        return STABLE
    if np.all(eigenvalues > 0):
        return UNSTABLE
    return SADDLE


def test_fixed_point_labels_match_jacobian():
    cases = [
        (coefficients_sine(REFERENCE), 0.16),
        (coefficients_sine(REFERENCE), -0.16),
        (coefficients_second_harmonic(REFERENCE, -0.5), 0.2),
        (coefficients_second_harmonic(REFERENCE, 0.5), -0.2),
    ]
    for coeffs, epsilon in cases:
        field = averaged_field(coeffs, epsilon)
        for point in averaged_fixed_points(coeffs, epsilon):
            assert np.max(np.abs(field(np.array([point.r_plus, point.r_minus])))) < 1e-12
            assert point.stability == _jacobian_label(field, point.r_plus, point.r_minus)


def test_second_harmonic_reference_radius():
    coeffs = coefficients_second_harmonic(REFERENCE, -0.5)
    points = averaged_fixed_points(coeffs, 0.2)
    both = [p for p in points if p.r_plus > 0 and p.r_minus > 0]
    assert len(points) == 4 and len(both) == 1
    assert abs(both[0].r_plus - 0.0375) < 1e-9 and abs(both[0].r_minus - 0.0375) < 1e-9
    assert both[0].stability == STABLE
    assert abs(predict_orbit(coeffs, 0.2).r_star - 0.0375) < 1e-9


def test_records():
    coeffs = coefficients_sine(REFERENCE)
    record = coefficients_record(coeffs)
    assert record["kind"] == SINE and set(record) >= {"p1", "p2", "p3", "p4"}
    assert abs(record["p1"][0] - 0.25) < 1e-6
    full = prediction_record(coeffs, predict_orbit(coeffs, 0.16))
    assert full["stable"] is True and abs(full["amplitude"] - 0.2) < 1e-9


def main():
    tests = [
        test_sine_coefficients,
        test_second_harmonic_coefficients,
        test_second_harmonic_needs_h,
        test_unimodal_has_no_reduction,
        test_sine_orbit,
        test_second_harmonic_orbits,
        test_averaged_fixed_points,
        test_fixed_point_labels_match_jacobian,
        test_second_harmonic_reference_radius,
        test_records,
    ]
    return run_tests("Center-manifold reduction", tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)

#!/usr/bin/env python3
"""
Convergence tests for the RK4 and integrating-factor RK4 steppers
"""

import sys

import numpy as np

from integrators import IntegratingFactorRK4, rk4_step
from test_runner import run_tests


def _integrate(stepper, state, dt: float, t_end: float):
    for _ in range(int(round(t_end / dt))):
        state = stepper(state, dt)
    return state


def test_rk4_order():
    exact = np.exp(-1.0 * 4.0)
    errors = [abs(_integrate(lambda y, h: rk4_step(lambda v: -v, y, h), 1.0, dt, 4.0) - exact)
              for dt in (0.1, 0.05)]
    assert 14.0 < errors[0] / errors[1] < 18.0


def test_integrating_factor_is_exact_on_linear_part():
    L = np.array([40j, -25j, 3j - 0.2])
    stepper = IntegratingFactorRK4(L, 0.1)
    Z = stepper.step(lambda z: np.zeros_like(z), np.ones(3, dtype=complex))
    assert np.max(np.abs(Z - np.exp(L * 0.1))) < 1e-15


def test_integrating_factor_step_halving():
    # dZ/dt = iωZ - |Z|²Z has |Z| = 1/sqrt(1 + 2t) and phase ωt from Z(0) = 1
    omega, t_end = 40.0, 5.0
    exact = np.exp(1j * omega * t_end) / np.sqrt(1.0 + 2.0 * t_end)

    def run(dt: float) -> complex:
        stepper = IntegratingFactorRK4(np.array([1j * omega]), dt)
        Z = np.array([1.0 + 0j])
        for _ in range(int(round(t_end / dt))):
            Z = stepper.step(lambda z: -np.abs(z) ** 2 * z, Z)
        return complex(Z[0])

    errors = [abs(run(dt) - exact) for dt in (0.05, 0.025)]
    # ω·dt = 2 does not limit the step
    assert errors[0] < 1e-5
    assert 12.0 < errors[0] / errors[1] < 20.0


def main():
    tests = [
        test_rk4_order,
        test_integrating_factor_is_exact_on_linear_part,
        test_integrating_factor_step_halving,
    ]
    return run_tests("Integrators", tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)

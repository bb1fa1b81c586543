"""
Fixed-step fourth-order integrators shared by the simulators and the reduced models.
"""

from typing import Callable, Union

import numpy as np

State = Union[np.ndarray, complex]
RightHandSide = Callable[[State], State]


def rk4_step(rhs: RightHandSide, state: State, dt: float) -> State:
    """Classical RK4 step for an autonomous system"""
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    return state + dt * (k1 + 2.0 * (k2 + k3) + k4) / 6.0


class IntegratingFactorRK4:
    """Lawson RK4 for dZ/dt = L Z + N(Z) with diagonal L

    The linear part is propagated exactly by e^{L dt}; only N is sampled by the
    RK4 stages, so the step size is not limited by max |L|.
    """

    def __init__(self, linear: np.ndarray, dt: float):
        self.dt = dt
        self.full = np.exp(linear * dt)
        self.half = np.exp(linear * (0.5 * dt))

    def step(self, nonlinear: RightHandSide, state: np.ndarray) -> np.ndarray:
        dt, full, half = self.dt, self.full, self.half
        k1 = nonlinear(state)
        k2 = nonlinear(half * (state + 0.5 * dt * k1))
        k3 = nonlinear(half * state + 0.5 * dt * k2)
        k4 = nonlinear(full * state + dt * half * k3)
        return full * state + dt / 6.0 * (full * k1 + 2.0 * half * (k2 + k3) + k4)

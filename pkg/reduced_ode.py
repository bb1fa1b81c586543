"""
Integrators for the truncated center-manifold systems and their averaged forms.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from center_manifold import SINE, CmCoefficients
from errors import Overflow
from integrators import rk4_step

logger = logging.getLogger(__name__)

FULL_SINE = "full_sine"
FULL_SECOND_HARMONIC = "full_second_harmonic"
POLAR = "polar"
AVERAGED_SINE = "averaged_sine"
AVERAGED_SECOND_HARMONIC = "averaged_second_harmonic"

OVERFLOW_LIMIT = 10.0


@dataclass
class CenterState:
    alpha_plus: complex
    alpha_minus: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha_plus, self.alpha_minus], dtype=complex)


@dataclass
class ReducedTrajectory:
    times: np.ndarray
    states: np.ndarray
    system_kind: str

    def center_states(self) -> List[CenterState]:
        if self.system_kind not in (FULL_SINE, FULL_SECOND_HARMONIC):
            raise ValueError(f"{self.system_kind} trajectories do not hold complex states")
        return [CenterState(complex(a), complex(b)) for a, b in self.states]

    def rows(self) -> List[Tuple[float, float, float, float, float]]:
        """Rows for the trajectory CSV"""
        if self.system_kind not in (FULL_SINE, FULL_SECOND_HARMONIC):
            raise ValueError("only complex trajectories are written as CSV")
        return [(float(t), a.real, a.imag, b.real, b.imag) for t, (a, b) in zip(self.times, self.states)]


def default_step(coeffs: CmCoefficients) -> float:
    return min(0.01, 0.05 / coeffs.y_c) if coeffs.y_c > 0 else 0.01


def default_horizon(coeffs: CmCoefficients, epsilon: float) -> float:
    rate = abs(epsilon * coeffs.growth.real)
    return 50.0 / rate if rate > 0 else 1000.0


def _unit_phase(alpha: complex) -> complex:
    # e^{-i arg α} with arg(0) := 0
    magnitude = abs(alpha)
    return alpha.conjugate() / magnitude if magnitude > 0 else 1.0 + 0j


def center_manifold_field(coeffs: CmCoefficients, epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """Right-hand side of the truncated complex system for (α₊, α₋)"""
    y_c = coeffs.y_c
    if coeffs.kind == SINE:
        p1, p2, p3, p4 = coeffs.p1, coeffs.p2, coeffs.p3, coeffs.p4
        c1, c2, c3, c4 = np.conj(p1), np.conj(p2), np.conj(p3), np.conj(p4)

        def rhs(z: np.ndarray) -> np.ndarray:
            a, b = z[0], z[1]
            linear = epsilon * (a + b)
            s = np.conj(a) + np.conj(b)
            return np.array([
                1j * y_c * a + p1 * linear + s * (p2 * a * a + p3 * b * b + p4 * a * b),
                -1j * y_c * b + c1 * linear + s * (c2 * b * b + c3 * a * a + c4 * a * b),
            ])
        return rhs

    q1, q2, q3 = coeffs.q1, coeffs.q2, coeffs.q3
    r1, r3 = np.conj(q1), np.conj(q3)

    def rhs(z: np.ndarray) -> np.ndarray:
        a, b = z[0], z[1]
        linear = epsilon * (a + b)
        return np.array([
            1j * y_c * a + q1 * linear + (q2 * a * a + q3 * b * b) * _unit_phase(a),
            -1j * y_c * b + r1 * linear + (q2 * b * b + r3 * a * a) * _unit_phase(b),
        ])
    return rhs


def averaged_field(coeffs: CmCoefficients, epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    rate = epsilon * coeffs.growth.real
    if coeffs.kind == SINE:
        cubic = coeffs.p2.real
        return lambda r: rate * r + cubic * r ** 3
    quadratic = coeffs.q2.real
    return lambda r: rate * r + quadratic * r ** 2


def _polar_field(coeffs: CmCoefficients, epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    full = center_manifold_field(coeffs, epsilon)

    def rhs(state: np.ndarray) -> np.ndarray:
        psi, r_plus, r_minus = state
        rotor = np.exp(1j * psi)
        f_plus, f_minus = full(np.array([r_plus * rotor, r_minus * np.conj(rotor)]))
        g_plus = f_plus * np.conj(rotor)
        g_minus = f_minus * rotor
        # the common phase drops out by rotational equivariance
        turn_plus = g_plus.imag / r_plus if r_plus > 0 else coeffs.y_c
        turn_minus = g_minus.imag / r_minus if r_minus > 0 else -coeffs.y_c
        return np.array([0.5 * (turn_plus - turn_minus), g_plus.real, g_minus.real])
    return rhs


def _integrate(rhs, state: np.ndarray, t_end: float, dt: float, record_stride: int,
               magnitude: Callable[[np.ndarray], float]) -> Tuple[np.ndarray, np.ndarray]:
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    steps = int(round(t_end / dt))
    times = [0.0]
    states = [state.copy()]
    for n in range(1, steps + 1):
        state = rk4_step(rhs, state, dt)
        if not np.all(np.isfinite(state)) or magnitude(state) > OVERFLOW_LIMIT:
            raise Overflow(f"reduced state left |α| <= {OVERFLOW_LIMIT:g} at t={n * dt:.4g}")
        if n % record_stride == 0 or n == steps:
            times.append(n * dt)
            states.append(state.copy())
    return np.array(times), np.array(states)


def integrate_center_manifold(coeffs: CmCoefficients, epsilon: float, init: CenterState,
                              t_end: Optional[float] = None, dt: Optional[float] = None,
                              record_stride: int = 1) -> ReducedTrajectory:
    """RK4 trajectory of the truncated complex system"""
    dt = dt or default_step(coeffs)
    t_end = t_end or default_horizon(coeffs, epsilon)
    times, states = _integrate(center_manifold_field(coeffs, epsilon), init.as_array(), t_end, dt,
                               record_stride, lambda z: float(np.max(np.abs(z))))
    kind = FULL_SINE if coeffs.kind == SINE else FULL_SECOND_HARMONIC
    logger.debug("%s trajectory: %d samples to t=%g", kind, len(times), times[-1])
    return ReducedTrajectory(times, states, kind)


def integrate_polar(coeffs: CmCoefficients, epsilon: float, psi0: float, r_plus0: float, r_minus0: float,
                    t_end: Optional[float] = None, dt: Optional[float] = None,
                    record_stride: int = 1) -> ReducedTrajectory:
    """(ψ, r₊, r₋) form of the truncated system in the gauge arg α₊ + arg α₋ = 0"""
    if r_plus0 < 0 or r_minus0 < 0:
        raise ValueError("radii must be nonnegative")
    dt = dt or default_step(coeffs)
    t_end = t_end or default_horizon(coeffs, epsilon)
    times, states = _integrate(_polar_field(coeffs, epsilon), np.array([psi0, r_plus0, r_minus0], dtype=float),
                               t_end, dt, record_stride, lambda s: float(max(abs(s[1]), abs(s[2]))))
    return ReducedTrajectory(times, states, POLAR)


def integrate_averaged(coeffs: CmCoefficients, epsilon: float, init: Tuple[float, float],
                       t_end: Optional[float] = None, dt: Optional[float] = None,
                       record_stride: int = 1) -> ReducedTrajectory:
    """RK4 on the decoupled averaged radial equations"""
    r0 = np.array(init, dtype=float)
    if np.any(r0 < 0):
        raise ValueError("averaged radii must be nonnegative")
    dt = dt or default_step(coeffs)
    t_end = t_end or default_horizon(coeffs, epsilon)
    times, states = _integrate(averaged_field(coeffs, epsilon), r0, t_end, dt, record_stride,
                               lambda r: float(np.max(np.abs(r))))
    kind = AVERAGED_SINE if coeffs.kind == SINE else AVERAGED_SECOND_HARMONIC
    return ReducedTrajectory(times, states, kind)

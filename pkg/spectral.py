"""
Dispersion function, eigenvalues and generalized eigenvalues.

D(λ) = ∫ g(ω)/(λ - iω) dω is analytic in Re λ > 0. Its continuation D̂ across
the imaginary axis equals D(λ) + 2πg(-iλ) on the second sheet. Eigenvalues of
the first harmonic solve D(λ) = 2/K; the second harmonic reuses the same
function through D₂(λ) = D(λ/2)/2 = 1/(Kh).
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from distributions import (
    AnalyticDistribution,
    adaptive_quad,
    cauchy_derivative,
    check_pole_guard,
    density_derivative_complex,
    eval_density,
    eval_density_complex,
    find_hilbert_zeros,
    hilbert_transform,
    check_strip_bound,
)
from errors import (
    AssumptionViolated,
    BranchLost,
    DegenerateTie,
    KuramotoLabError,
    NoConvergence,
    QuadratureFailure,
    SheetViolation,
)

logger = logging.getLogger(__name__)

PRINCIPAL = "principal"
SECOND = "second"

ROOT_RESIDUAL = 1e-10
MERGE_TOL = 1e-8
MULTIPLICITY_TOL = 1e-6
CROSSING_TOL = 1e-6
BOUNDARY_TOL = 1e-9
NEWTON_MAX_ITER = 100
SEED_GRID = (20, 40)
TIE_TOL = 1e-9
NEAR_AXIS = 0.005
CIRCLE_POINTS = 64
CLOSED_FORM_TOL = 1e-8
CLOSED_FORM_SAMPLES = (1.0 + 0.0j, 0.5 + 0.5j, 0.5 - 0.8j, 2.0 + 1.2j)


@dataclass(frozen=True)
class SpectralPoint:
    """A complex λ tagged with its Riemann sheet"""
    lam: complex
    sheet: str = PRINCIPAL


@dataclass
class EigenvalueBranch:
    harmonic: int
    samples: List[Tuple[float, SpectralPoint]] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    crossings: List[float] = field(default_factory=list)

    def append(self, K: float, point: SpectralPoint, residual: float) -> None:
        self.samples.append((K, point))
        self.residuals.append(residual)


@dataclass
class AssumptionFlags:
    A1: bool
    A2: bool
    A3: bool
    A4: bool
    A5: bool
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def all_hold(self) -> bool:
        return self.A1 and self.A2 and self.A3 and self.A4 and self.A5


@dataclass
class TransitionReport:
    candidates: List[Tuple[float, float]]
    y_c: float
    K_c: float
    dlambda_dK: complex
    maximizers: List[float] = field(default_factory=list)
    K_c2: Optional[float] = None
    flags: Optional[AssumptionFlags] = None


@dataclass(frozen=True)
class PairingValue:
    m: int
    n: int
    value: complex


def sheet_of(lam: complex, default: str = PRINCIPAL) -> str:
    if lam.real > CROSSING_TOL:
        return PRINCIPAL
    if lam.real < -CROSSING_TOL:
        return SECOND
    return default


def _check_sheet(dist: AnalyticDistribution, point: SpectralPoint) -> None:
    lam = complex(point.lam)
    if point.sheet == PRINCIPAL:
        if lam.real < -CROSSING_TOL:
            raise SheetViolation(f"principal-sheet point {lam} has Re λ < 0")
    elif point.sheet == SECOND:
        if lam.real > CROSSING_TOL:
            raise SheetViolation(f"second-sheet point {lam} has Re λ > 0")
        if not dist.has_closed_dispersion and lam.real < -dist.strip_width:
            raise SheetViolation(f"Re λ = {lam.real:g} is outside the continuation strip of width {dist.strip_width:g}")
    else:
        raise SheetViolation(f"unknown sheet '{point.sheet}'")


def dispersion_quadrature(dist: AnalyticDistribution, lam: complex, n: int = 0) -> complex:
    """n-th derivative of ∫ g(ω)/(λ - iω) dω by quadrature, for Re λ ≠ 0"""
    lam = complex(lam)
    if lam.real == 0.0:
        raise SheetViolation("the defining integral is singular on the imaginary axis")
    sign_factor = (-1) ** n * math.factorial(n)

    def integrand(u: float) -> complex:
        c, s = math.cos(u), math.sin(u)
        weight = float(dist.density(math.tan(u))) / (c * c)
        return sign_factor * weight * c ** (n + 1) / (lam * c - 1j * s) ** (n + 1)

    points = sorted({math.atan(lam.imag)} | {math.atan(p.real) for p in dist.poles})
    real = adaptive_quad(lambda u: integrand(u).real, -0.5 * np.pi, 0.5 * np.pi, points=points)
    imag = adaptive_quad(lambda u: integrand(u).imag, -0.5 * np.pi, 0.5 * np.pi, points=points)
    return complex(real, imag)


def _axis_limit(dist: AnalyticDistribution, y: float) -> complex:
    return complex(np.pi * eval_density(dist, y), -np.pi * hilbert_transform(dist, y))


def _continued_value(dist: AnalyticDistribution, lam: complex) -> complex:
    if 0 < abs(lam.real) < NEAR_AXIS * dist.strip_width:
        # mean-value property on a circle keeps quadrature away from the near-singular axis
        radius = 0.25 * dist.strip_width
        theta = 2.0 * np.pi * (np.arange(CIRCLE_POINTS) + 0.5) / CIRCLE_POINTS
        nodes = lam + radius * np.exp(1j * theta)
        return complex(np.mean([_direct_value(dist, complex(z)) for z in nodes]))
    return _direct_value(dist, lam)


def _direct_value(dist: AnalyticDistribution, lam: complex) -> complex:
    if lam.real > 0:
        return dispersion_quadrature(dist, lam)
    if lam.real == 0:
        return _axis_limit(dist, lam.imag)
    if lam.real < -dist.strip_width:
        raise SheetViolation(f"Re λ = {lam.real:g} is outside the continuation strip")
    return dispersion_quadrature(dist, lam) + 2.0 * np.pi * complex(eval_density_complex(dist, -1j * lam))


def continued_dispersion(dist: AnalyticDistribution, lam: complex, n: int = 0) -> complex:
    """D̂⁽ⁿ⁾(λ), the dispersion function continued across the imaginary axis"""
    lam = complex(lam)
    if dist.has_closed_dispersion:
        check_pole_guard(dist.dispersion_poles, lam)
        return dist.closed_dispersion(lam, n)
    if n == 0:
        return _continued_value(dist, lam)

    radius = 0.25 * dist.strip_width
    if abs(lam.real) < 2.0 * radius:
        values = np.vectorize(lambda z: _continued_value(dist, complex(z)), otypes=[complex])
        return cauchy_derivative(values, lam, n, radius)
    direct = dispersion_quadrature(dist, lam, n)
    if lam.real < 0:
        direct += 2.0 * np.pi * (-1j) ** n * density_derivative_complex(dist, -1j * lam, n)
    return direct


@functools.lru_cache(maxsize=32)
def closed_form_gap(dist: AnalyticDistribution) -> float:
    """Largest |closed form - quadrature| of D and D' at fixed principal-sheet points"""
    scale = dist.frequency_scale
    gap, where = 0.0, 0j
    for lam in CLOSED_FORM_SAMPLES:
        lam = complex(lam.real, lam.imag * scale)
        for n in (0, 1):
            error = abs(dist.closed_dispersion(lam, n) - dispersion_quadrature(dist, lam, n))
            if error > gap:
                gap, where = error, lam
    if gap > CLOSED_FORM_TOL:
        raise QuadratureFailure(f"closed-form dispersion of {dist.label} is off by {gap:.3g} at λ = {where}")
    logger.debug("closed-form dispersion of %s agrees with quadrature to %.2g", dist.label, gap)
    return gap


def dispersion(dist: AnalyticDistribution, point: SpectralPoint) -> complex:
    """D(λ) on the sheet the point lives on"""
    _check_sheet(dist, point)
    if dist.has_closed_dispersion:
        closed_form_gap(dist)
    return continued_dispersion(dist, complex(point.lam), 0)


def dispersion_derivative(dist: AnalyticDistribution, point: SpectralPoint, n: int) -> complex:
    """D⁽ⁿ⁾(λ), n = 1 or 2, continued on the second sheet"""
    if n not in (1, 2):
        raise ValueError("only first and second derivatives are supported")
    _check_sheet(dist, point)
    if dist.has_closed_dispersion:
        closed_form_gap(dist)
    return continued_dispersion(dist, complex(point.lam), n)


def newton_root(func: Callable[[complex], complex], deriv: Callable[[complex], complex],
                z0: complex, residual_tol: float = ROOT_RESIDUAL,
                max_iter: int = NEWTON_MAX_ITER) -> complex:
    """Newton iteration in the complex plane"""
    z = complex(z0)
    for _ in range(max_iter):
        value = func(z)
        slope = deriv(z)
        if not (np.isfinite(value) and np.isfinite(slope)) or slope == 0:
            raise NoConvergence(f"degenerate Newton step at {z}")
        step = value / slope
        z -= step
        if abs(step) < 1e-14 * (1.0 + abs(z)):
            return z
        # near a double root the step stalls at roundoff while the residual is already tiny
        if abs(value) < 1e-2 * residual_tol and abs(step) < 1e-6 * (1.0 + abs(z)):
            return z
    raise NoConvergence(f"Newton did not converge from {z0}")


@functools.lru_cache(maxsize=32)
def _hilbert_zeros_cached(dist: AnalyticDistribution, extent: float) -> Tuple[float, ...]:
    return tuple(find_hilbert_zeros(dist, (-extent, extent)))


def _search_extent(dist: AnalyticDistribution) -> float:
    return 10.0 * dist.frequency_scale


def _imag_bound(dist: AnalyticDistribution) -> float:
    zeros = _hilbert_zeros_cached(dist, _search_extent(dist))
    top = max((abs(y) for y in zeros), default=0.0)
    return 3.0 * (top + dist.frequency_scale)


def _solve_on_grid(dist: AnalyticDistribution, target: complex, re_values: np.ndarray,
                   im_values: np.ndarray, keep: Callable[[complex], bool]) -> List[Tuple[complex, int]]:
    func = lambda z: continued_dispersion(dist, z) - target
    deriv = lambda z: continued_dispersion(dist, z, 1)

    found: List[complex] = []
    for re in re_values:
        for im in im_values:
            try:
                root = newton_root(func, deriv, complex(re, im))
                if abs(func(root)) >= ROOT_RESIDUAL or not keep(root):
                    continue
            except KuramotoLabError as e:
                logger.debug("seed %s dropped: %s", complex(re, im), e)
                continue
            found.append(root)

    roots: List[Tuple[complex, int]] = []
    for root in found:
        multiplicity = 1
        if abs(deriv(root)) < MULTIPLICITY_TOL:
            try:
                root = newton_root(deriv, lambda z: continued_dispersion(dist, z, 2), root)
                multiplicity = 2
            except KuramotoLabError:
                logger.debug("could not refine suspected double root %s", root)
        if any(abs(root - r) < MERGE_TOL for r, _ in roots):
            continue
        roots.append((root, multiplicity))
    return roots


def _expand(roots: List[Tuple[complex, int]]) -> List[complex]:
    out: List[complex] = []
    for root, multiplicity in sorted(roots, key=lambda item: (round(item[0].real, 9), item[0].imag)):
        out.extend([root] * multiplicity)
    return out


def find_eigenvalues(dist: AnalyticDistribution, K: float, harmonic: int = 1, h: float = 0.0,
                     include_boundary: bool = False) -> List[complex]:
    """Roots with Re λ > 0 of D_j(λ) = 1/(ijKf_j); double roots are listed twice"""
    if K <= 0:
        raise ValueError("K must be positive")
    if harmonic == 1:
        K_eff, scale = K, 1.0
    elif harmonic == 2:
        if h == 0:
            raise ValueError("the second harmonic has no eigenvalues when h = 0")
        # D₂(λ) = D(λ/2)/2, so μ = λ/2 solves D(μ) = 2/(Kh)
        K_eff, scale = K * h, 2.0
    else:
        raise ValueError("harmonic must be 1 or 2")

    n_re, n_im = SEED_GRID
    re_values = np.linspace(0.0, 10.0 * abs(K_eff), n_re + 1)[1:]
    bound = _imag_bound(dist)
    im_values = np.linspace(-bound, bound, n_im)

    def keep(root: complex) -> bool:
        if root.real > BOUNDARY_TOL:
            return True
        if include_boundary and abs(root.real) <= BOUNDARY_TOL:
            return True
        if abs(root.real) <= BOUNDARY_TOL:
            logger.info("boundary root %s at K=%g excluded", root * scale, K)
        return False

    roots = _solve_on_grid(dist, 2.0 / K_eff, re_values, im_values, keep)
    eigenvalues = [r * scale for r in _expand(roots)]
    logger.debug("K=%g harmonic=%d: eigenvalues %s", K, harmonic, eigenvalues)
    return eigenvalues


def find_generalized_eigenvalues(dist: AnalyticDistribution, K: float,
                                 region: Optional[Tuple[float, float, float, float]] = None) -> List[SpectralPoint]:
    """Roots of D(λ) + 2πg(-iλ) = 2/K in a rectangle (re_min, re_max, im_min, im_max) of the left half plane"""
    if K <= 0:
        raise ValueError("K must be positive")
    if region is None:
        bound = _imag_bound(dist)
        region = (-dist.strip_width, 0.0, -bound, bound)
    re_min, re_max, im_min, im_max = region
    if re_max > 0 or re_min > re_max or im_min > im_max:
        raise ValueError(f"invalid region {region}")
    if not dist.has_closed_dispersion and re_min < -dist.strip_width:
        raise SheetViolation(f"region reaches Re λ = {re_min:g}, beyond the strip width {dist.strip_width:g}")

    n_re, n_im = SEED_GRID
    re_values = np.linspace(re_min, re_max, n_re)
    im_values = np.linspace(im_min, im_max, n_im)
    slack = 1e-8

    def keep(root: complex) -> bool:
        return (root.real <= slack and re_min - slack <= root.real
                and im_min - slack <= root.imag <= im_max + slack)

    roots = _solve_on_grid(dist, 2.0 / K, re_values, im_values, keep)
    return [SpectralPoint(r, SECOND) for r in _expand(roots)]


def _branch_derivative(dist: AnalyticDistribution, lam: complex, K: float) -> complex:
    return -2.0 / (K * K * continued_dispersion(dist, lam, 1))


def _correct(dist: AnalyticDistribution, K: float, guess: complex) -> complex:
    func = lambda z: continued_dispersion(dist, z) - 2.0 / K
    root = newton_root(func, lambda z: continued_dispersion(dist, z, 1), guess, max_iter=30)
    if abs(func(root)) >= ROOT_RESIDUAL:
        raise NoConvergence(f"residual {abs(func(root)):.3g} at K={K:g}")
    return root


def _locate_crossing(dist: AnalyticDistribution, K_a: float, lam_a: complex,
                     K_b: float, lam_b: complex) -> Tuple[float, complex]:
    for _ in range(80):
        K_mid = 0.5 * (K_a + K_b)
        lam_mid = _correct(dist, K_mid, 0.5 * (lam_a + lam_b))
        if abs(lam_mid.real) < CROSSING_TOL:
            return K_mid, lam_mid
        if (lam_mid.real > 0) == (lam_a.real > 0):
            K_a, lam_a = K_mid, lam_mid
        else:
            K_b, lam_b = K_mid, lam_mid
    raise NoConvergence("crossing bisection did not reach the tolerance")


def track_branch(dist: AnalyticDistribution, K_start: float, K_end: float, seed: SpectralPoint,
                 steps: int = 200, jump_factor: float = 5.0) -> EigenvalueBranch:
    """Predictor-corrector continuation of a first-harmonic root in K"""
    if steps < 1:
        raise ValueError("steps must be positive")
    branch = EigenvalueBranch(harmonic=1)
    lam = complex(seed.lam)
    residual = abs(continued_dispersion(dist, lam) - 2.0 / K_start)
    if residual >= 1e-8:
        raise ValueError(f"seed residual {residual:.3g} exceeds 1e-8 at K={K_start:g}")
    sheet = seed.sheet
    branch.append(K_start, SpectralPoint(lam, sheet), residual)
    if K_start == K_end:
        return branch

    span = K_end - K_start
    nominal = span / steps
    floor = abs(nominal) * 2.0 ** -20
    K = K_start
    dK = nominal

    while (K_end - K) * np.sign(span) > 0:
        dK = math.copysign(min(abs(dK), abs(K_end - K)), span)
        K_next = K_end if abs(K_end - (K + dK)) < 1e-12 * max(1.0, abs(K_end)) else K + dK
        try:
            slope = _branch_derivative(dist, lam, K)
            predicted = lam + slope * (K_next - K)
            new_lam = _correct(dist, K_next, predicted)
            if abs(new_lam - lam) > jump_factor * abs(slope * dK) + 1e-3:
                raise NoConvergence(f"jump of {abs(new_lam - lam):.3g} at K={K_next:g}")
        except KuramotoLabError as e:
            if abs(dK) / 2.0 < floor:
                raise BranchLost(f"branch lost near K={K:g}: {e}", branch) from e
            logger.debug("halving step at K=%g: %s", K, e)
            dK /= 2.0
            continue

        if lam.real * new_lam.real < 0 and max(abs(lam.real), abs(new_lam.real)) > CROSSING_TOL:
            K_cross, lam_cross = _locate_crossing(dist, K, lam, K_next, new_lam)
            entering = PRINCIPAL if new_lam.real > 0 else SECOND
            branch.append(K_cross, SpectralPoint(lam_cross, entering),
                          abs(continued_dispersion(dist, lam_cross) - 2.0 / K_cross))
            branch.crossings.append(K_cross)
            logger.info("branch crosses Re λ = 0 at K=%.6f, λ=%s, entering the %s sheet",
                        K_cross, lam_cross, entering)
            sheet = entering

        K = K_next
        lam = new_lam
        sheet = sheet_of(lam, sheet)
        branch.append(K, SpectralPoint(lam, sheet), abs(continued_dispersion(dist, lam) - 2.0 / K))
        dK = math.copysign(min(abs(dK) * 2.0, abs(nominal)), span)

    return branch


def transition_point(dist: AnalyticDistribution, search_interval: Optional[Tuple[float, float]] = None) -> TransitionReport:
    """Onset candidates K_j = 2/(πg(y_j)), the critical pair ±y_c and dλ/dK at onset"""
    if search_interval is None:
        zeros = list(_hilbert_zeros_cached(dist, _search_extent(dist)))
    else:
        zeros = find_hilbert_zeros(dist, search_interval)
    if not zeros:
        raise AssumptionViolated("H[g] has no zeros in the search interval")

    densities = np.array([eval_density(dist, y) for y in zeros])
    candidates = [(float(y), float(2.0 / (np.pi * gy))) for y, gy in zip(zeros, densities) if gy > 0]
    top = float(np.max(densities))
    maximizers = [float(y) for y, gy in zip(zeros, densities) if gy >= top * (1.0 - TIE_TOL)]
    distinct = sorted({round(abs(y), 6) for y in maximizers})
    if len(distinct) > 1:
        raise DegenerateTie(f"max g = {top:.12g} attained at |y| in {distinct}")

    y_c = abs(maximizers[0])
    K_c = 2.0 / (np.pi * top)
    slope = continued_dispersion(dist, 1j * y_c, 1)
    report = TransitionReport(
        candidates=candidates,
        y_c=y_c,
        K_c=K_c,
        dlambda_dK=-2.0 / (K_c * K_c * slope),
        maximizers=maximizers,
    )
    logger.info("transition point for %s: y_c=%.10g K_c=%.10g", dist.label, y_c, K_c)
    return report


def _evenness_error(dist: AnalyticDistribution) -> float:
    grid = np.linspace(0.0, 10.0 * dist.frequency_scale, 401)
    return float(np.max(np.abs(dist.density(grid) - dist.density(-grid))))


def verify_assumptions(dist: AnalyticDistribution, h: float,
                       report: Optional[TransitionReport] = None) -> TransitionReport:
    """Evaluate hypotheses A1-A5; never raises on a failed hypothesis"""
    if report is None:
        report = transition_point(dist)
    diagnostics: Dict[str, object] = {}

    # A1: h < 1, equivalently K_c < K_c2 = K_c/h for h > 0
    a1 = h < 1
    if h > 0:
        report.K_c2 = min(K for _, K in report.candidates) / h
        diagnostics["A1"] = f"K_c2 = {report.K_c2:.10g}"
    else:
        report.K_c2 = None
        diagnostics["A1"] = "h <= 0, no second-harmonic threshold"

    a2, worst = check_strip_bound(dist)
    diagnostics["A2"] = f"max |g(z)|(1+|z|^2)/C = {worst:.6g}"

    a3 = report.y_c > 0 and len(report.maximizers) == 2
    if a3:
        derivative = continued_dispersion(dist, 1j * report.y_c, 1)
        a3 = abs(derivative) > MULTIPLICITY_TOL
        diagnostics["A3"] = f"maximizers {report.maximizers}, |D'(iy_c)| = {abs(derivative):.6g}"
    else:
        diagnostics["A3"] = f"maximizers {report.maximizers} are not a nonzero pair"

    a4 = report.dlambda_dK.real > 0
    diagnostics["A4"] = f"Re dλ/dK = {report.dlambda_dK.real:.10g}"

    asymmetry = _evenness_error(dist)
    a5 = dist.is_even and asymmetry <= 1e-12
    diagnostics["A5"] = f"max |g(ω) - g(-ω)| = {asymmetry:.3g}"

    report.flags = AssumptionFlags(A1=a1, A2=a2, A3=a3, A4=a4, A5=a5, diagnostics=diagnostics)
    if not report.flags.all_hold():
        logger.warning("assumption check for %s with h=%g: %s", dist.label, h, diagnostics)
    return report


def pairing(dist: AnalyticDistribution, m: int, n: int, report: TransitionReport) -> PairingValue:
    """⟨μ₊ᵐ μ₋ⁿ P₀|P₀⟩ = ∫ g(ω) / ((iy_c - iω)^m (-iy_c - iω)^n) dω as a right limit"""
    if m < 0 or n < 0 or m + n > 3:
        raise ValueError("pairings are defined for m, n >= 0 with m + n <= 3")
    a, b = 1j * report.y_c, -1j * report.y_c
    if a == b:
        raise AssumptionViolated("pairings need y_c > 0")
    derivatives = {
        (point, k): continued_dispersion(dist, point, k)
        for point in (a, b)
        for k in range(3)
    }

    def single(point: complex, power: int) -> complex:
        if power == 0:
            return 1.0 + 0j
        k = power - 1
        return (-1) ** k / math.factorial(k) * derivatives[(point, k)]

    @functools.lru_cache(maxsize=None)
    def value(p: int, q: int) -> complex:
        if q == 0:
            return single(a, p)
        if p == 0:
            return single(b, q)
        # 1/(PQ) = (1/Q - 1/P)/(a - b) with P = a - iω, Q = b - iω
        return (value(p - 1, q) - value(p, q - 1)) / (a - b)

    return PairingValue(m=m, n=n, value=complex(value(m, n)))


def spectral_record(K: float, point: SpectralPoint, residual: float) -> Dict[str, object]:
    return {
        "K": float(K),
        "re_lambda": float(point.lam.real),
        "im_lambda": float(point.lam.imag),
        "sheet": point.sheet,
        "residual": float(residual),
    }

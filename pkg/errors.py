"""
Exception and warning types for the Kuramoto-Daido lab.
Every numerical failure raised by the library derives from KuramotoLabError.
"""

from typing import Any, Optional


class KuramotoLabError(Exception):
    """Base class for all lab errors"""


class PoleProximity(KuramotoLabError):
    """Evaluation point lies within the guard distance of a pole"""

    def __init__(self, point: complex, pole: complex, guard: float):
        self.point = point
        self.pole = pole
        self.guard = guard
        super().__init__(f"point {point} is within {guard:g} of pole {pole}")


class QuadratureFailure(KuramotoLabError):
    """Adaptive quadrature did not reach the requested tolerance"""


class SheetViolation(KuramotoLabError):
    """A spectral point is evaluated on a sheet where it does not live"""


class NoConvergence(KuramotoLabError):
    """Newton iteration did not converge"""


class BranchLost(KuramotoLabError):
    """Continuation failed mid-path; the partial branch is kept on the error"""

    def __init__(self, message: str, branch: Optional[Any] = None):
        super().__init__(message)
        self.branch = branch


class DegenerateTie(KuramotoLabError):
    """Two distinct |y| values attain the maximal density among Hilbert zeros"""


class AssumptionViolated(KuramotoLabError):
    """A hypothesis required by the reduction does not hold"""


class Overflow(KuramotoLabError):
    """A reduced trajectory left the small-amplitude regime"""


class WindowTooShort(KuramotoLabError):
    """The post-transient window holds too few oscillation periods"""


class NonDecaying(KuramotoLabError):
    """The fitted envelope does not decay"""


class ConfigError(KuramotoLabError):
    """Run configuration is missing or invalid"""


class TruncationWarning(UserWarning):
    """The harmonic closure carries too much energy in the last retained mode"""

"""
Exception hierarchy.

InputError      -> bad input (CLI exit 2, HTTP 400)
NumericalError  -> a kernel could not reach its tolerance (CLI exit 3, HTTP 500)
PropertyError   -> a mathematical hypothesis or verdict failed (CLI exit 1, HTTP 409)
"""

from __future__ import annotations

from typing import Any, Optional, Tuple


class KobpathError(Exception):
    pass


# =====================================================
# INPUT
# =====================================================
class InputError(KobpathError):
    pass


class DimensionMismatch(InputError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Expected a vector of length {expected}, got {got}")
        self.expected = expected
        self.got = got


class PointOutsideDomain(InputError):
    def __init__(self, point: Any, margin: float):
        super().__init__(f"Point {point} is not inside the domain (margin {margin:g})")
        self.point = point
        self.margin = margin


class OutOfRange(InputError):
    pass


class BallNotContained(InputError):
    pass


class InvalidSampleCounts(InputError):
    pass


class InvalidPath(InputError):
    pass


class PathSpecError(InputError):
    pass


class ConstantPath(InputError):
    def __init__(self, length: float):
        super().__init__(f"Path is constant (k-length {length:g}); a non-constant path is required")
        self.length = length


# =====================================================
# NUMERICAL
# =====================================================
class NumericalError(KobpathError):
    pass


class QuadratureNonConvergence(NumericalError):
    def __init__(self, a: float, b: float, depth: int):
        super().__init__(
            f"Adaptive Simpson did not converge on [{a:.10g}, {b:.10g}] at depth {depth}"
        )
        self.a = a
        self.b = b
        self.depth = depth


class NoFeasiblePath(NumericalError):
    pass


class NotConstantOnInterval(NumericalError):
    def __init__(self, index: int, interval: Tuple[float, float], variation: float):
        super().__init__(
            f"Path varies by {variation:.3g} on zero interval #{index} {interval}; not a plateau"
        )
        self.index = index
        self.interval = interval
        self.variation = variation


class DegenerateResult(NumericalError):
    pass


# =====================================================
# PROPERTIES
# =====================================================
class PropertyError(KobpathError):
    pass


class NotInvertible(PropertyError):
    def __init__(self, witness: Tuple[float, float]):
        super().__init__(
            f"Arc-length function is not invertible: zero-speed interval [{witness[0]:.6g}, {witness[1]:.6g}]"
        )
        self.witness = witness


class HypothesisViolated(PropertyError):
    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report
